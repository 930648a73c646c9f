#pragma once

#include <cstdint>
#include <functional>

#include "sgm/params.hpp"
#include "sgm/tape.hpp"

namespace sgm {

struct FdReport {
    double max_rel_error = 0;
    std::size_t coords_checked = 0;
};

/// Central-difference check of the tape gradient. `build` must record the
/// (deterministic) loss onto the given tape using the current parameter
/// values. Compares (f(p+h e) - f(p-h e)) / 2h against the tape gradient on a
/// random subset of at least `min_coords` coordinates (all of them if fewer
/// exist); relative error uses denominator max(|a|, |b|, 1e-8).
FdReport finite_difference_check(ParamStore& params,
                                 const std::function<ValueId(Tape&)>& build, double h = 1e-5,
                                 std::size_t min_coords = 200, std::uint64_t seed = 0);

}  // namespace sgm
