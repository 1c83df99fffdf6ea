#include "sanm/models/face_encoder.hpp"

namespace sanm::models {

FaceEncoder FaceEncoder::random(std::size_t block_count, std::size_t dim, std::size_t heads, std::size_t ff_hidden,
                                SeededRng& rng) {
  FaceEncoder enc;
  for (std::size_t i = 0; i < block_count; ++i) {
    enc.blocks.push_back({AttentionBlock::random(dim, heads, rng), FeedForward::random(dim, ff_hidden, rng)});
  }
  return enc;
}

Var face_encoder_forward(ParamBinder& bind, const FaceEncoder& enc, Var emb_face, Var emb_img) {
  Var h = emb_face;
  for (const auto& block : enc.blocks) {
    h = cross_attention(bind, block.cross, h, emb_img);
    h = feedforward(bind, block.ff, h);
  }
  return h;
}

Tensor face_encoder_forward(const FaceEncoder& enc, const Tensor& emb_face, const Tensor& emb_img) {
  Tape tape;
  ParamBinder bind(tape);
  return face_encoder_forward(bind, enc, tape.constant(emb_face), tape.constant(emb_img)).value();
}

}  // namespace sanm::models
