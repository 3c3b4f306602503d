// Plays one short episode on the five-arm preset and prints the end state.

#include <cstdio>

#include "pagame/engine.hpp"
#include "pagame/presets.hpp"

int main() {
  pagame::GameConfig cfg;
  cfg.horizon = 500;
  const auto model = pagame::find_preset("table1_n5")->model;

  const pagame::Trace trace = pagame::run_episode(cfg, model, /*seed=*/7);

  std::printf("oracle target arm: %zu, value per round: %.4f\n", *trace.oracle.target_arm + 1,
              trace.oracle_value);
  std::printf("cumulative regret after %zu rounds: %.2f\n", trace.horizon(), trace.regret_final());
  std::printf("linf error of the final estimate: %.4f\n", trace.linf_final);
  if (trace.final_s_hat) {
    std::printf("s_hat:");
    for (double v : *trace.final_s_hat) std::printf(" %.3f", v);
    std::printf("\n");
  }
  return 0;
}
