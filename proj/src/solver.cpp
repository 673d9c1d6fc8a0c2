#include "tvfr/solver.hpp"

namespace tvfr {

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 1 || std::size_t(folds) > n) throw InvalidInput("make_folds: need 1 <= folds <= n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    CounterRng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    for (std::size_t p = 0; p < n; ++p) out[p % std::size_t(folds)].push_back(perm[p]);
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

std::size_t select_min_error(std::span<const double> lambdas, std::span<const double> errors) {
    if (lambdas.empty() || lambdas.size() != errors.size())
        throw InvalidInput("select_min_error: lambdas and errors must be nonempty and aligned");
    const double best = *std::min_element(errors.begin(), errors.end());
    const double cut = best + 1e-12 * std::abs(best);
    std::size_t pick = errors.size();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (errors[i] <= cut && (pick == errors.size() || lambdas[i] > lambdas[pick])) pick = i;
    return pick;
}

}  // namespace tvfr
