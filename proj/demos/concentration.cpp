// Minimized set negativity on the one-parameter family in C^2 x C^2, with
// the per-state split at the optimum. Writes CSV to stdout.
//
//   concentration [starts] [seed]

#include "aes/heuristic.hpp"
#include "aes/io.hpp"
#include "aes/parallel.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  aes::MinimizeOptions opts;
  opts.starts = argc > 1 ? std::atoi(argv[1]) : 20;
  opts.seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 0;
  opts.jobs = aes::default_jobs();
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.5 + 0.05 * i);
  const auto rows = aes::sweep(aes::one_param_family(aes::Bipartition(2, 2), grid), aes::Measure::negativity, opts);
  std::cout << aes::to_csv(aes::sweep_table(rows, 4, opts.starts, opts.seed));
  for (const auto& r : rows)
    if (!r.ok()) return 1;
  return 0;
}
