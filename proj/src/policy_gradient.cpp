#include "metaadapt/policy_gradient.hpp"

namespace metaadapt {

std::vector<std::vector<double>> advantages(const RolloutBatch& batch, double discount,
                                            const GradientOptions& options) {
  std::vector<std::vector<double>> out(batch.episodes.size());
  std::size_t longest = 0;
  for (std::size_t k = 0; k < batch.episodes.size(); ++k) {
    const auto& steps = batch.episodes[k].steps;
    auto& g = out[k];
    g.resize(steps.size());
    double running = 0.0;
    for (std::size_t t = steps.size(); t-- > 0;) {
      running = steps[t].reward + discount * running;
      g[t] = running;
    }
    longest = std::max(longest, steps.size());
  }
  if (!options.baseline) return out;

  // Episodes that ended before t contribute a return-to-go of zero.
  std::vector<double> baseline(longest, 0.0);
  for (const auto& g : out) {
    for (std::size_t t = 0; t < g.size(); ++t) baseline[t] += g[t];
  }
  for (auto& b : baseline) b /= static_cast<double>(out.size());
  for (auto& g : out) {
    for (std::size_t t = 0; t < g.size(); ++t) g[t] -= baseline[t];
  }
  return out;
}

}  // namespace metaadapt
