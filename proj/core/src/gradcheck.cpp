#include "sgm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "sgm/rng.hpp"

namespace sgm {

FdReport finite_difference_check(ParamStore& params,
                                 const std::function<ValueId(Tape&)>& build, double h,
                                 std::size_t min_coords, std::uint64_t seed) {
    Tape tape;
    ValueId loss = build(tape);
    params.zero_grads();
    tape.backward(loss);

    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) analytic.push_back(params.entry(i).grad);

    // Flat coordinate space over all parameters.
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = 0; j < params.entry(i).value.size(); ++j) coords.emplace_back(i, j);

    Rng rng(Rng::mix(seed, 0x6fd7a1c3));
    if (coords.size() > min_coords) {
        rng.shuffle(coords);
        coords.resize(min_coords);
    }

    auto eval = [&]() {
        Tape t;
        ValueId l = build(t);
        return t.value(l)[0];
    };

    FdReport report;
    report.coords_checked = coords.size();
    for (auto [pi, ci] : coords) {
        double& p = params.entry(pi).value[ci];
        const double orig = p;
        p = orig + h;
        double fp = eval();
        p = orig - h;
        double fm = eval();
        p = orig;
        double numeric = (fp - fm) / (2.0 * h);
        double a = analytic[pi][ci];
        double rel = std::abs(numeric - a) / std::max({std::abs(numeric), std::abs(a), 1e-8});
        report.max_rel_error = std::max(report.max_rel_error, rel);
    }
    return report;
}

}  // namespace sgm
