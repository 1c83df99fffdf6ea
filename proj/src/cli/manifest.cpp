#include "sanm/cli/manifest.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace sanm::cli {

namespace {

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: digest init failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw std::runtime_error("sha256: final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const void* data, std::size_t size) {
  Digest d;
  d.update(data, size);
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::filesystem::filesystem_error("cannot open for hashing", path, std::make_error_code(std::errc::io_error));
  Digest d;
  std::array<char, 1 << 16> buf;
  while (is) {
    is.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  return d.hex();
}

void write_run_manifest(const std::filesystem::path& out, const std::string& command, const RunConfig& config,
                        const nlohmann::json& inputs, std::vector<std::filesystem::path> artifacts) {
  {
    std::ofstream os(out / "config.ini", std::ios::trunc);
    os << dump_config(config);
    if (!os) throw std::filesystem::filesystem_error("cannot write config echo", out / "config.ini",
                                                     std::make_error_code(std::errc::io_error));
  }
  artifacts.insert(artifacts.begin(), "config.ini");
  nlohmann::json files = nlohmann::json::array();
  for (const auto& rel : artifacts) files.push_back({{"path", rel.generic_string()}, {"sha256", sha256_file(out / rel)}});
  const nlohmann::json manifest = {{"command", command}, {"inputs", inputs}, {"artifacts", files}};
  std::ofstream os(out / "manifest.json", std::ios::trunc);
  os << manifest.dump(2) << '\n';
  if (!os) throw std::filesystem::filesystem_error("cannot write manifest", out / "manifest.json",
                                                   std::make_error_code(std::errc::io_error));
}

}  // namespace sanm::cli
