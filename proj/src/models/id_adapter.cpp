#include "sanm/models/id_adapter.hpp"

#include <stdexcept>
#include <string>

namespace sanm::models {

std::string_view to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::Full:
      return "full";
    case AlignMode::Addition:
      return "addition";
    case AlignMode::Norm:
      return "norm";
  }
  return "full";
}

AlignMode parse_align_mode(std::string_view text) {
  if (text == "full") return AlignMode::Full;
  if (text == "addition") return AlignMode::Addition;
  if (text == "norm") return AlignMode::Norm;
  throw std::invalid_argument("unknown align mode '" + std::string(text) + "'");
}

Var distribution_align(Var z_face, Var z_img, std::size_t groups) {
  require_same_shape(z_face.value(), z_img.value(), "distribution_align");
  const Shape& shape = z_face.shape();
  Var mu_face = ad::group_mean(z_face, groups);
  Var mu_img = ad::group_mean(z_img, groups);
  Var ratio = ad::group_std(z_img, groups) / ad::group_std(z_face, groups);
  Var centered = z_face - ad::expand_groups(mu_face, shape);
  return ad::expand_groups(mu_img, shape) + centered * ad::expand_groups(ratio, shape);
}

Tensor distribution_align(const Tensor& z_face, const Tensor& z_img, std::size_t groups) {
  Tape tape;
  return distribution_align(tape.constant(z_face), tape.constant(z_img), groups).value();
}

Var standardize(Var z, std::size_t groups) {
  const Shape& shape = z.shape();
  Var centered = z - ad::expand_groups(ad::group_mean(z, groups), shape);
  return centered / ad::expand_groups(ad::group_std(z, groups), shape);
}

IdAdapterBlock IdAdapterBlock::random(std::size_t dim, std::size_t heads, std::size_t ff_hidden, SeededRng& rng) {
  IdAdapterBlock b;
  b.self_attn = AttentionBlock::random(dim, heads, rng);
  b.cross_img = AttentionBlock::random(dim, heads, rng);
  b.cross_face = AttentionBlock::random(dim, heads, rng);
  b.ff = FeedForward::random(dim, ff_hidden, rng);
  return b;
}

Var id_adapter_forward(ParamBinder& bind, const IdAdapterBlock& block, Var z, Var emb_img, Var emb_face,
                       std::size_t frames, AlignMode mode) {
  Var zs = self_attention(bind, block.self_attn, z, frames);
  Var z_img = cross_attention(bind, block.cross_img, zs, emb_img, frames, 1);
  Var z_face = cross_attention(bind, block.cross_face, zs, emb_face, frames, 1);
  Var face;
  switch (mode) {
    case AlignMode::Full:
      face = distribution_align(z_face, z_img, frames);
      break;
    case AlignMode::Addition:
      face = z_face;
      break;
    case AlignMode::Norm:
      face = standardize(z_face, frames);
      break;
  }
  return feedforward(bind, block.ff, face + z_img);
}

Tensor id_adapter_forward(const IdAdapterBlock& block, const Tensor& z, const Tensor& emb_img,
                          const Tensor& emb_face, std::size_t frames, AlignMode mode) {
  Tape tape;
  ParamBinder bind(tape);
  return id_adapter_forward(bind, block, tape.constant(z), tape.constant(emb_img), tape.constant(emb_face), frames,
                            mode)
      .value();
}

}  // namespace sanm::models
