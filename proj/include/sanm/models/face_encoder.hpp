#pragma once

#include <vector>

#include "sanm/models/attention.hpp"

namespace sanm::models {

struct FaceEncoderBlock {
  AttentionBlock cross;
  FeedForward ff;
};

// Refines face embedding tokens by cross-attending to the reference image
// embedding, block by block.
struct FaceEncoder {
  std::vector<FaceEncoderBlock> blocks;

  std::size_t block_count() const { return blocks.size(); }

  static FaceEncoder random(std::size_t block_count, std::size_t dim, std::size_t heads, std::size_t ff_hidden,
                            SeededRng& rng);

  template <class Self, class F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    for (std::size_t i = 0; i < self.blocks.size(); ++i) {
      const std::string p = prefix + "." + std::to_string(i);
      AttentionBlock::visit(self.blocks[i].cross, p + ".cross", f);
      FeedForward::visit(self.blocks[i].ff, p + ".ff", f);
    }
  }
};

Var face_encoder_forward(ParamBinder& bind, const FaceEncoder& enc, Var emb_face, Var emb_img);
Tensor face_encoder_forward(const FaceEncoder& enc, const Tensor& emb_face, const Tensor& emb_img);

}  // namespace sanm::models
