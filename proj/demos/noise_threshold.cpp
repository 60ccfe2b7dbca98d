// Brackets the visibility at which white noise makes the four-state set
// absolutely separable according to the heuristic: the largest grid point
// whose minimized negativity stays below the threshold.
//
//   noise_threshold [steps] [starts]

#include "aes/heuristic.hpp"
#include "aes/io.hpp"
#include "aes/parallel.hpp"

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
  const int steps = argc > 1 ? std::atoi(argv[1]) : 21;
  aes::MinimizeOptions opts;
  opts.starts = argc > 2 ? std::atoi(argv[2]) : 10;
  opts.seed = 0;
  opts.jobs = aes::default_jobs();
  const double threshold = 1e-4;
  if (steps < 2) {
    std::fprintf(stderr, "steps must be at least 2\n");
    return 2;
  }
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i) grid.push_back(0.5 + 0.5 * i / (steps - 1));
  const auto rows = aes::sweep(aes::noise_family(aes::candidate_max_set(), grid), aes::Measure::negativity, opts);
  double last_zero = -1.0, first_positive = -1.0;
  for (const auto& r : rows) {
    if (!r.ok()) return 1;
    std::printf("v = %.4f  negativity = %.6g\n", r.param, r.result.value);
    if (r.result.value <= threshold) last_zero = r.param;
    if (r.result.value > threshold && first_positive < 0) first_positive = r.param;
  }
  std::printf("heuristic value <= %g up to v = %.4f, first value above at v = %.4f\n", threshold, last_zero,
              first_positive);
  return 0;
}
