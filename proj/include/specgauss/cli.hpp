#pragma once

// Command-line front end. `args` excludes the program name.
//
//   specgauss coeffs       --model M [model flags] --kmax K [--format csv|json]
//   specgauss simulate     --model M [model flags] --N n --grid G --paths P --seed S [--format csv|bin]
//   specgauss validate-cov --model M [model flags] --N n --grid G --paths P --seed S [--input FILE]
//   specgauss rate         --model M [model flags] --nmin a --N b --replicates R --seed S
//   specgauss quantize     --model M [model flags] --N n --budget B [--dims m] --grid G
//
// Models: fbm (--hurst), brownian, gen-ou (--theta --alpha --mu --sigma --sigma0),
// fou (stationary stretched-exponential covariance, --hurst < 1/2).
// Every command accepts --T, --out (default stdout) and --threads.

#include <iosfwd>
#include <string>
#include <vector>

namespace specgauss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specgauss::cli
