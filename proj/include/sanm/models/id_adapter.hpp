#pragma once

#include <string_view>

#include "sanm/models/attention.hpp"

namespace sanm::models {

// How the face branch is injected next to the image branch.
//   Full:     face branch re-standardized to the image branch's mean/std
//   Addition: face branch added as is
//   Norm:     face branch standardized to zero mean / unit std only
enum class AlignMode { Full, Addition, Norm };

std::string_view to_string(AlignMode mode);
AlignMode parse_align_mode(std::string_view text);

// mu_img + (z_face - mu_face) * (sigma_img / sigma_face), with population
// statistics taken per contiguous chunk (`groups` chunks, one per frame) and
// std clamped below by 1e-5.
Var distribution_align(Var z_face, Var z_img, std::size_t groups = 1);
Tensor distribution_align(const Tensor& z_face, const Tensor& z_img, std::size_t groups = 1);

// (z_face - mu_face) / sigma_face per chunk.
Var standardize(Var z, std::size_t groups = 1);

struct IdAdapterBlock {
  AttentionBlock self_attn;
  AttentionBlock cross_img;
  AttentionBlock cross_face;
  FeedForward ff;

  static IdAdapterBlock random(std::size_t dim, std::size_t heads, std::size_t ff_hidden, SeededRng& rng);

  template <class Self, class F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    AttentionBlock::visit(self.self_attn, prefix + ".self", f);
    AttentionBlock::visit(self.cross_img, prefix + ".cross_img", f);
    AttentionBlock::visit(self.cross_face, prefix + ".cross_face", f);
    FeedForward::visit(self.ff, prefix + ".ff", f);
  }
};

// z <- SAttn(z); z_img = CAttn(z, emb_img); z_face = CAttn(z, emb_face);
// returns FF(align(z_face, z_img) + z_img). z holds `frames` groups of
// tokens; both embedding sequences are shared by every frame.
Var id_adapter_forward(ParamBinder& bind, const IdAdapterBlock& block, Var z, Var emb_img, Var emb_face,
                       std::size_t frames = 1, AlignMode mode = AlignMode::Full);
Tensor id_adapter_forward(const IdAdapterBlock& block, const Tensor& z, const Tensor& emb_img,
                          const Tensor& emb_face, std::size_t frames = 1, AlignMode mode = AlignMode::Full);

}  // namespace sanm::models
