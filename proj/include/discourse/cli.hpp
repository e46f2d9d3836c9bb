#ifndef DISCOURSE_CLI_HPP
#define DISCOURSE_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace discourse::cli {

enum ExitStatus : int { kSuccess = 0, kUsageError = 2, kEmptyResult = 3 };

// Runs one subcommand (distill, flow, similar, eval-pairs, stats). args
// excludes the program name. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// k distinct indices from [0, population), sorted ascending. The draw is a
// partial Fisher-Yates shuffle driven by mt19937_64 seeded from
// (seed, stream) through std::seed_seq, so it is identical across
// platforms. Throws ArgumentError when k is 0 or exceeds population.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k, std::uint64_t seed,
                                        std::uint64_t stream);

}  // namespace discourse::cli

#endif  // DISCOURSE_CLI_HPP
