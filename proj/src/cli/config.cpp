#include "sanm/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace sanm::cli {

namespace {

std::string format(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}
template <class T>
  requires std::is_unsigned_v<T>
std::string format(T v) {
  return std::to_string(v);
}
std::string format(bool v) { return v ? "true" : "false"; }
std::string format(const std::string& v) { return v; }

template <class T>
T parse_value(const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw std::invalid_argument("bad number");
  return v;
}

template <>
bool parse_value<bool>(const std::string& text) {
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  throw std::invalid_argument("bad boolean");
}

template <>
std::string parse_value<std::string>(const std::string& text) {
  return text;
}

struct Key {
  std::string section;
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <class T, class Access>
Key key(std::string section, std::string name, Access access) {
  Key k{std::move(section), std::move(name), nullptr, nullptr};
  k.get = [access](const RunConfig& c) {
    const T& v = access(const_cast<RunConfig&>(c));
    return format(v);
  };
  k.set = [access](RunConfig& c, const std::string& text) { access(c) = parse_value<T>(text); };
  return k;
}

const std::vector<Key>& keys() {
  using S = std::size_t;
  using U = std::uint64_t;
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(key<S>("data", "identities", [](RunConfig& c) -> S& { return c.data.identities; }));
    k.push_back(key<S>("data", "train_per_identity", [](RunConfig& c) -> S& { return c.data.train_per_identity; }));
    k.push_back(key<S>("data", "eval_per_identity", [](RunConfig& c) -> S& { return c.data.eval_per_identity; }));
    k.push_back(key<S>("data", "frames", [](RunConfig& c) -> S& { return c.data.frames; }));
    k.push_back(key<S>("data", "height", [](RunConfig& c) -> S& { return c.data.height; }));
    k.push_back(key<S>("data", "width", [](RunConfig& c) -> S& { return c.data.width; }));
    k.push_back(key<U>("data", "seed", [](RunConfig& c) -> U& { return c.data_seed; }));

    k.push_back(key<S>("model", "latent_c", [](RunConfig& c) -> S& { return c.model.latent_c; }));
    k.push_back(key<S>("model", "pixel_patch", [](RunConfig& c) -> S& { return c.model.pixel_patch; }));
    k.push_back(key<S>("model", "model_dim", [](RunConfig& c) -> S& { return c.model.model_dim; }));
    k.push_back(key<S>("model", "heads", [](RunConfig& c) -> S& { return c.model.heads; }));
    k.push_back(key<S>("model", "adapter_blocks", [](RunConfig& c) -> S& { return c.model.adapter_blocks; }));
    k.push_back(key<S>("model", "face_blocks", [](RunConfig& c) -> S& { return c.model.face_blocks; }));
    k.push_back(key<S>("model", "face_tokens", [](RunConfig& c) -> S& { return c.model.face_tokens; }));
    k.push_back(key<S>("model", "ff_mult", [](RunConfig& c) -> S& { return c.model.ff_mult; }));
    k.push_back(key<S>("model", "sigma_features", [](RunConfig& c) -> S& { return c.model.sigma_features; }));
    k.push_back(key<S>("model", "id_dim", [](RunConfig& c) -> S& { return c.model.id_dim; }));
    k.push_back(Key{"model", "align", [](const RunConfig& c) { return std::string(models::to_string(c.model.align)); },
                    [](RunConfig& c, const std::string& t) { c.model.align = models::parse_align_mode(t); }});
    k.push_back(key<bool>("model", "temporal", [](RunConfig& c) -> bool& { return c.model.temporal; }));
    k.push_back(key<double>("model", "sigma_data", [](RunConfig& c) -> double& { return c.model.sigma_data; }));
    k.push_back(key<S>("model", "decoder_hidden", [](RunConfig& c) -> S& { return c.model.decoder_hidden; }));
    k.push_back(key<S>("model", "embedder_hidden", [](RunConfig& c) -> S& { return c.model.embedder_hidden; }));
    k.push_back(key<S>("model", "embedder_patch", [](RunConfig& c) -> S& { return c.model.embedder_patch; }));

    k.push_back(key<S>("schedule", "steps", [](RunConfig& c) -> S& { return c.schedule.steps; }));
    k.push_back(key<double>("schedule", "sigma_min", [](RunConfig& c) -> double& { return c.schedule.sigma_min; }));
    k.push_back(key<double>("schedule", "sigma_max", [](RunConfig& c) -> double& { return c.schedule.sigma_max; }));
    k.push_back(key<double>("schedule", "rho", [](RunConfig& c) -> double& { return c.schedule.rho; }));
    k.push_back(key<double>("schedule", "s_churn", [](RunConfig& c) -> double& { return c.schedule.churn.s_churn; }));
    k.push_back(key<double>("schedule", "s_noise", [](RunConfig& c) -> double& { return c.schedule.churn.s_noise; }));
    k.push_back(key<double>("schedule", "s_tmin", [](RunConfig& c) -> double& { return c.schedule.churn.s_tmin; }));
    k.push_back(key<double>("schedule", "s_tmax", [](RunConfig& c) -> double& { return c.schedule.churn.s_tmax; }));

    k.push_back(key<bool>("guidance", "enabled", [](RunConfig& c) -> bool& { return c.guidance.enabled; }));
    k.push_back(key<double>("guidance", "lr", [](RunConfig& c) -> double& { return c.guidance.lr; }));
    k.push_back(key<S>("guidance", "k_steps", [](RunConfig& c) -> S& { return c.guidance.k_steps; }));
    k.push_back(key<std::string>("guidance", "active_range",
                                 [](RunConfig& c) -> std::string& { return c.guidance.active_range; }));
    k.push_back(key<bool>("guidance", "persistent_adam", [](RunConfig& c) -> bool& { return c.guidance.persistent_adam; }));
    k.push_back(key<bool>("guidance", "reoptimize_correction",
                          [](RunConfig& c) -> bool& { return c.guidance.reoptimize_correction; }));

    k.push_back(key<S>("train", "epochs", [](RunConfig& c) -> S& { return c.train.epochs; }));
    k.push_back(key<double>("train", "lr", [](RunConfig& c) -> double& { return c.train.lr; }));
    k.push_back(key<double>("train", "sigma_min", [](RunConfig& c) -> double& { return c.train.sigma_min; }));
    k.push_back(key<double>("train", "sigma_max", [](RunConfig& c) -> double& { return c.train.sigma_max; }));
    k.push_back(key<U>("train", "seed", [](RunConfig& c) -> U& { return c.train.seed; }));
    k.push_back(key<S>("train", "embedder_steps", [](RunConfig& c) -> S& { return c.embedder.steps; }));
    k.push_back(key<S>("train", "embedder_batch", [](RunConfig& c) -> S& { return c.embedder.batch; }));
    k.push_back(key<double>("train", "embedder_lr", [](RunConfig& c) -> double& { return c.embedder.lr; }));
    k.push_back(key<double>("train", "embedder_margin", [](RunConfig& c) -> double& { return c.embedder.margin; }));
    k.push_back(key<S>("train", "decoder_steps", [](RunConfig& c) -> S& { return c.decoder.steps; }));
    k.push_back(key<S>("train", "decoder_batch", [](RunConfig& c) -> S& { return c.decoder.batch; }));
    k.push_back(key<double>("train", "decoder_lr", [](RunConfig& c) -> double& { return c.decoder.lr; }));

    k.push_back(key<U>("eval", "seed", [](RunConfig& c) -> U& { return c.eval_seed; }));
    return k;
  }();
  return table;
}

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

}  // namespace

models::ModelConfig RunConfig::model_config() const {
  models::ModelConfig m = model;
  m.frames = data.frames;
  if (m.pixel_patch == 0 || data.height % m.pixel_patch != 0 || data.width % m.pixel_patch != 0) {
    throw ConfigError("config: [data] height/width must be multiples of [model] pixel_patch");
  }
  m.latent_h = data.height / m.pixel_patch;
  m.latent_w = data.width / m.pixel_patch;
  m.pixel_c = 3;
  return m;
}

EdmSchedule RunConfig::build() const {
  return build_schedule(schedule.steps, schedule.sigma_min, schedule.sigma_max, schedule.rho, schedule.churn);
}

sampler::GuidanceConfig RunConfig::guidance_config() const {
  sampler::GuidanceConfig g;
  g.enabled = guidance.enabled;
  g.lr = guidance.lr;
  g.k_steps = guidance.k_steps;
  g.active_sigma_range = parse_active_range(guidance.active_range);
  g.persistent_adam = guidance.persistent_adam;
  g.reoptimize_correction = guidance.reoptimize_correction;
  return g;
}

void RunConfig::validate() const {
  try {
    data.validate();
    const auto m = model_config();
    if (m.model_dim % m.heads != 0) throw ConfigError("config: [model] model_dim must be divisible by heads");
    if (m.pixel_h() % m.embedder_patch != 0) throw ConfigError("config: [model] embedder_patch must divide the frame");
    build();
    guidance_config().validate();
    train.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::optional<std::pair<double, double>> parse_active_range(const std::string& text) {
  if (text == "all") return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("config: [guidance] active_range must be 'all' or 'low,high'");
  try {
    const double lo = parse_value<double>(text.substr(0, comma));
    const double hi = parse_value<double>(text.substr(comma + 1));
    if (lo > hi) throw ConfigError("config: [guidance] active_range is inverted");
    return std::make_pair(lo, hi);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: [guidance] active_range has a bad number");
  }
}

RunConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside any section");
    for (const auto& [name, value] : body) {
      const Key* k = find_key(section, name);
      if (k == nullptr) throw ConfigError("config: unknown key [" + section + "] " + name);
      try {
        k->set(cfg, value.data());
      } catch (const std::exception&) {
        throw ConfigError("config: bad value '" + value.data() + "' for [" + section + "] " + name);
      }
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  return parse_config(is);
}

std::string dump_config(const RunConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) os << '\n';
      section = k.section;
      os << '[' << section << "]\n";
    }
    os << k.name << " = " << k.get(config) << '\n';
  }
  return os.str();
}

}  // namespace sanm::cli
