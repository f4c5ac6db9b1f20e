#include "popsynth/fbsco.hpp"

#include "popsynth/chi2.hpp"
#include "popsynth/errors.hpp"
#include "popsynth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace popsynth {

namespace {

// One SSZ cell term of Eq-style weighting: F * (Ax - E)^2 with
// F = (C * Ax * (1 - Ax/N))^-1 in general and F = 1/C at the degenerate
// counts Ax = 0 and Ax = N.
double cell_term(std::int64_t ax, std::int64_t e, double chi2_crit, std::int64_t n_total) {
    const double d = static_cast<double>(ax - e);
    if (ax == 0 || ax == n_total) return d * d / chi2_crit;
    const double axd = static_cast<double>(ax);
    const double f = 1.0 / (chi2_crit * axd * (1.0 - axd / static_cast<double>(n_total)));
    return f * d * d;
}

std::int64_t common_target_total(const std::vector<MarginalTable> &targets) {
    if (targets.empty()) throw DataError("fbsco: no targets");
    const std::int64_t total = targets.front().total();
    for (const auto &t : targets)
        if (t.total() != total)
            throw DataError("fbsco: inconsistent target totals for zone '" + t.zone_id() + "'");
    return total;
}

// Mutable search state: per-tabulation cell counts and their score terms.
struct SearchState {
    const AttributeMatrix &A;
    std::vector<std::vector<std::int64_t>> counts; // per tab, per cell
    std::vector<std::vector<double>> term;
    double total = 0.0;

    SearchState(const AttributeMatrix &a, const std::vector<std::int64_t> &x) : A(a) {
        counts.reserve(A.tabulation_count());
        term.reserve(A.tabulation_count());
        for (std::size_t k = 0; k < A.tabulation_count(); ++k) {
            counts.push_back(A.counts(x, k));
            const auto &tab = A.tabulation(k);
            std::vector<double> t(tab.expected.size());
            for (std::size_t c = 0; c < t.size(); ++c)
                t[c] = cell_term(counts.back()[c], tab.expected[c], tab.chi2_crit, tab.target_total);
            term.push_back(std::move(t));
        }
        total = recompute();
    }

    double recompute() {
        double sum = 0.0;
        for (const auto &t : term)
            for (double v : t) sum += v;
        total = sum;
        return sum;
    }

    // Score change of moving one replication from candidate i to candidate j.
    double delta(std::size_t i, std::size_t j) const {
        double d = 0.0;
        for (std::size_t k = 0; k < A.tabulation_count(); ++k) {
            const auto &tab = A.tabulation(k);
            const std::uint32_t ci = tab.cell_of[i];
            const std::uint32_t cj = tab.cell_of[j];
            if (ci == cj) continue;
            d += cell_term(counts[k][ci] - 1, tab.expected[ci], tab.chi2_crit, tab.target_total) -
                 term[k][ci];
            d += cell_term(counts[k][cj] + 1, tab.expected[cj], tab.chi2_crit, tab.target_total) -
                 term[k][cj];
        }
        return d;
    }

    void apply(std::size_t i, std::size_t j) {
        for (std::size_t k = 0; k < A.tabulation_count(); ++k) {
            const auto &tab = A.tabulation(k);
            const std::uint32_t ci = tab.cell_of[i];
            const std::uint32_t cj = tab.cell_of[j];
            if (ci == cj) continue;
            counts[k][ci] -= 1;
            counts[k][cj] += 1;
            const double old = term[k][ci] + term[k][cj];
            term[k][ci] = cell_term(counts[k][ci], tab.expected[ci], tab.chi2_crit, tab.target_total);
            term[k][cj] = cell_term(counts[k][cj], tab.expected[cj], tab.chi2_crit, tab.target_total);
            total += term[k][ci] + term[k][cj] - old;
        }
    }
};

// Support set (indices with x > 0) with O(1) membership moves.
class Support {
  public:
    explicit Support(const std::vector<std::int64_t> &x) : pos_(x.size(), npos) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] > 0) insert(i);
    }
    std::size_t size() const { return items_.size(); }
    std::size_t at(std::size_t k) const { return items_[k]; }
    bool contains(std::size_t i) const { return pos_[i] != npos; }
    void insert(std::size_t i) {
        if (pos_[i] != npos) return;
        pos_[i] = items_.size();
        items_.push_back(i);
    }
    void erase(std::size_t i) {
        const std::size_t p = pos_[i];
        if (p == npos) return;
        items_[p] = items_.back();
        pos_[items_[p]] = p;
        items_.pop_back();
        pos_[i] = npos;
    }

  private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> items_;
    std::vector<std::size_t> pos_;
};

constexpr double kImprovementTol = 1e-12;

} // namespace

AttributeMatrix AttributeMatrix::build(const Population &pool,
                                       const std::vector<MarginalTable> &targets) {
    if (targets.empty()) throw DataError("fbsco: no targets");
    AttributeMatrix A;
    A.pool_size_ = pool.size();
    for (const auto &target : targets) {
        if (target.schema().fingerprint() != pool.schema().fingerprint())
            throw DataError("fbsco: target schema does not match pool schema");
        Tabulation tab;
        tab.attr_idx = target.attr_indices();
        tab.expected.resize(target.n_cells());
        for (std::size_t c = 0; c < target.n_cells(); ++c) tab.expected[c] = target.count_at(c);
        tab.target_total = target.total();
        tab.chi2_crit = chi2_critical(static_cast<int>(target.n_cells()) - 1);
        tab.cell_of.resize(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i)
            tab.cell_of[i] = static_cast<std::uint32_t>(target.flat_of_row(pool.row(i)));
        A.tabs_.push_back(std::move(tab));
    }
    return A;
}

std::vector<std::int64_t> AttributeMatrix::counts(const std::vector<std::int64_t> &x,
                                                  std::size_t k) const {
    const auto &tab = tabs_.at(k);
    if (x.size() != tab.cell_of.size()) throw DataError("fbsco: selection length mismatch");
    std::vector<std::int64_t> out(tab.expected.size(), 0);
    for (std::size_t i = 0; i < x.size(); ++i) out[tab.cell_of[i]] += x[i];
    return out;
}

double rssz(const SelectionVector &selection, const AttributeMatrix &A,
            const std::vector<MarginalTable> &targets) {
    if (targets.size() != A.tabulation_count()) throw DataError("rssz: tabulation count mismatch");
    if (selection.x.size() != A.pool_size()) throw DataError("rssz: selection length mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < A.tabulation_count(); ++k) {
        const auto &tab = A.tabulation(k);
        if (targets[k].n_cells() != tab.expected.size()) throw DataError("rssz: cell layout mismatch");
        if (tab.target_total == 0) {
            for (auto e : tab.expected)
                if (e != 0) throw NumericError("rssz: zero-total tabulation with nonzero cells");
            throw NumericError("rssz: tabulation total must be positive");
        }
        const auto ax = A.counts(selection.x, k);
        for (std::size_t c = 0; c < ax.size(); ++c)
            sum += cell_term(ax[c], tab.expected[c], tab.chi2_crit, tab.target_total);
    }
    return sum;
}

SelectionVector initialize(const Population &pool, const std::vector<MarginalTable> &targets,
                           std::uint64_t seed) {
    const std::int64_t n_target = common_target_total(targets);
    SelectionVector sel;
    sel.x.assign(pool.size(), 0);
    sel.total = n_target;
    if (n_target == 0) return sel;
    if (pool.is_empty()) throw DataError("fbsco: positive target with empty candidate pool");
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::int64_t d = 0; d < n_target; ++d) sel.x[pick(rng)] += 1;
    return sel;
}

FbscoResult optimize(const Population &pool, const std::vector<MarginalTable> &targets,
                     const FbscoConfig &config) {
    if (config.rssz_threshold <= 0.0) throw DataError("fbsco: rssz_threshold must be positive");
    if (config.max_iterations == 0) throw DataError("fbsco: max_iterations must be positive");
    if (config.restarts < 1) throw DataError("fbsco: needs at least one restart");

    const std::int64_t n_target = common_target_total(targets);
    FbscoResult result;
    if (n_target == 0) {
        result.selection.x.assign(pool.size(), 0);
        result.selection.total = 0;
        result.rssz = 0.0;
        result.converged = true;
        result.no_population = true;
        return result;
    }
    if (pool.is_empty()) throw DataError("fbsco: positive target with empty candidate pool");

    const AttributeMatrix A = AttributeMatrix::build(pool, targets);
    const std::size_t n = pool.size();

    SelectionVector best;
    double best_rssz = std::numeric_limits<double>::infinity();
    std::uint64_t global_iter = 0;

    for (int restart = 0; restart < config.restarts; ++restart) {
        const std::uint64_t rseed = derive_seed(config.seed, "restart-" + std::to_string(restart));
        SelectionVector sel = initialize(pool, targets, rseed);
        SearchState state(A, sel.x);
        Support support(sel.x);
        Rng rng(derive_seed(rseed, "moves"));
        std::uniform_int_distribution<std::size_t> pick_any(0, n - 1);

        int stall = 0;

        auto accept = [&](std::size_t i, std::size_t j) {
            state.apply(i, j);
            sel.x[i] -= 1;
            sel.x[j] += 1;
            if (sel.x[i] == 0) support.erase(i);
            if (sel.x[j] == 1) support.insert(j);
            if (config.record_trace) {
                // sum constraint checked on every accepted move
                std::int64_t s = 0;
                for (auto v : sel.x) {
                    if (v < 0) throw NumericError("fbsco: negative replication count");
                    s += v;
                }
                if (s != n_target)
                    throw NumericError("fbsco: selection total drifted from target");
                result.trace.emplace_back(global_iter, state.total);
            }
        };

        for (std::uint64_t iter = 0; iter < config.max_iterations; ++iter) {
            ++global_iter;
            if (state.total < config.rssz_threshold) break;

            bool improved = false;
            for (int m = 0; m < config.moves_per_iteration && support.size() > 0; ++m) {
                std::uniform_int_distribution<std::size_t> pick_support(0, support.size() - 1);
                const std::size_t i = support.at(pick_support(rng));
                std::size_t j = pick_any(rng);
                if (j == i) continue;
                const double d = state.delta(i, j);
                if (d < -kImprovementTol * (1.0 + std::abs(state.total))) {
                    accept(i, j);
                    improved = true;
                    break;
                }
            }
            if (improved) {
                stall = 0;
                continue;
            }

            if (n <= config.full_scan_limit) {
                // certify local optimality with a deterministic full scan
                bool found = false;
                for (std::size_t si = 0; si < support.size() && !found; ++si) {
                    const std::size_t i = support.at(si);
                    for (std::size_t j = 0; j < n && !found; ++j) {
                        if (j == i) continue;
                        if (state.delta(i, j) <
                            -kImprovementTol * (1.0 + std::abs(state.total))) {
                            accept(i, j);
                            found = true;
                        }
                    }
                }
                if (!found) break; // no improving swap exists
                stall = 0;
            } else if (++stall >= config.stall_limit) {
                break;
            }
        }

        const double final_rssz = state.recompute();
        if (final_rssz < best_rssz) {
            best_rssz = final_rssz;
            best = sel;
        }
        if (best_rssz < config.rssz_threshold) break;
    }

    result.selection = std::move(best);
    result.rssz = best_rssz;
    result.converged = best_rssz < config.rssz_threshold;
    result.iterations_used = global_iter;
    return result;
}

Population materialize(const SelectionVector &selection, const Population &pool) {
    if (selection.x.size() != pool.size()) throw DataError("materialize: length mismatch");
    std::vector<Population::Row> rows;
    rows.reserve(static_cast<std::size_t>(std::max<std::int64_t>(selection.total, 0)));
    for (std::size_t i = 0; i < selection.x.size(); ++i)
        for (std::int64_t r = 0; r < selection.x[i]; ++r) rows.push_back(pool.row(i));
    return Population(pool.schema_ptr(), std::move(rows), Provenance::synthetic);
}

} // namespace popsynth
