#include "sanm/sampler/guidance.hpp"

#include <stdexcept>

namespace sanm::sampler {

void GuidanceConfig::validate() const {
  if (enabled && !(lr > 0.0)) throw std::invalid_argument("guidance: learning rate must be > 0 when enabled");
  if (active_sigma_range && active_sigma_range->first > active_sigma_range->second) {
    throw std::invalid_argument("guidance: active sigma range is inverted");
  }
}

bool GuidanceConfig::active_at(double sigma) const {
  if (!enabled || k_steps == 0) return false;
  if (!active_sigma_range) return true;
  return sigma >= active_sigma_range->first && sigma <= active_sigma_range->second;
}

Var face_loss(models::ParamBinder& bind, Var x_op, const Tensor& reference, const models::LatentDecoder& decoder,
              const models::FaceEmbedder& embedder) {
  const std::size_t d = embedder.embedding_dim();
  if (reference.numel() != d) {
    throw ShapeError("face_loss: reference embedding has " + std::to_string(reference.numel()) +
                     " values, embedder produces " + std::to_string(d));
  }
  Tape& tape = bind.tape();
  Var frames = decoder.decode(bind, x_op);
  Var emb = ad::normalize_rows(embedder.embed(bind, frames));
  Var ref = ad::normalize_rows(tape.constant(reference.reshaped({1, d})));
  Var cos = ad::matmul(emb, ad::transpose(ref));
  return ad::mean(ad::abs(ad::add_scalar(-cos, 1.0)));
}

double face_loss(const Tensor& x_op, const Tensor& reference, const models::LatentDecoder& decoder,
                 const models::FaceEmbedder& embedder) {
  Tape tape;
  models::ParamBinder bind(tape);
  return face_loss(bind, tape.constant(x_op), reference, decoder, embedder).value().item();
}

FaceOptimizeResult hjb_face_optimize(const Tensor& x_pred, const GuidanceConfig& guidance,
                                     const models::LatentDecoder& decoder, const models::FaceEmbedder& embedder,
                                     AdamState* persistent) {
  guidance.validate();
  if (guidance.reference_embedding.numel() != embedder.embedding_dim()) {
    throw ShapeError("hjb_face_optimize: reference embedding dimension mismatch");
  }
  FaceOptimizeResult result;
  result.x = x_pred;
  if (!guidance.enabled || guidance.k_steps == 0) {
    result.loss_before = result.loss_after = face_loss(x_pred, guidance.reference_embedding, decoder, embedder);
    result.loss_trace = {result.loss_before};
    return result;
  }

  AdamState local(AdamConfig{guidance.lr});
  AdamState& state = persistent ? *persistent : local;
  state.config.lr = guidance.lr;
  for (std::size_t k = 0; k < guidance.k_steps; ++k) {
    Tape tape;
    models::ParamBinder bind(tape);
    Var x = tape.leaf(result.x, true);
    Var loss = face_loss(bind, x, guidance.reference_embedding, decoder, embedder);
    result.loss_trace.push_back(loss.value().item());
    const GradMap grads = tape.backprop(loss);
    adam_step(state, result.x, grads.at(x));
  }
  result.loss_trace.push_back(face_loss(result.x, guidance.reference_embedding, decoder, embedder));
  result.loss_before = result.loss_trace.front();
  result.loss_after = result.loss_trace.back();
  return result;
}

}  // namespace sanm::sampler
