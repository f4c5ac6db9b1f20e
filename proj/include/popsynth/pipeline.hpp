#pragma once

#include "popsynth/ctgan.hpp"
#include "popsynth/fbsco.hpp"
#include "popsynth/marginal.hpp"
#include "popsynth/metrics.hpp"
#include "popsynth/population.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace popsynth {

enum class Strategy { baseline, standalone, hybrid };
enum class ZoneStatus { successful, unsuccessful, no_population };

const char *to_string(Strategy s);
const char *to_string(ZoneStatus s);
Strategy strategy_from_string(const std::string &name);

struct ZoneJob {
    std::string zone_id;
    std::vector<MarginalTable> targets; // one per tabulation, shared zone id
    Strategy strategy = Strategy::baseline;
    std::uint64_t seed = 0;
    double rssz_threshold = 1.0;
    double budget_factor = 10.0;
    std::size_t pool_multiplier = 2; // hybrid pool = multiplier x micro-sample
    FbscoConfig fbsco;
};

struct ZoneOutcome {
    std::string zone_id;
    Strategy strategy = Strategy::baseline;
    ZoneStatus status = ZoneStatus::unsuccessful;
    Population synthetic;
    std::optional<double> rssz;
    std::optional<MetricReport> metrics;
    std::int64_t target_total = 0;
    std::string diagnostic;
    std::map<std::string, double> stats;                    // pool_size, iterations, ...
    std::vector<std::pair<std::uint64_t, double>> trace;    // (iteration, rssz), when requested
};

// Fills every nonzero quota cell exactly: generation is conditioned on the
// rarest single attribute value of the cell's tuple (by training frequency),
// filtered to the full tuple. Attempts per cell stay within
// budget_factor * count * 1000.
Population reject_sample_to_quotas(const TrainedGenerator &model, const MarginalTable &quota_table,
                                   double budget_factor, std::uint64_t seed);

// Non-throwing variant: keeps whatever was produced and names the first
// exhausted cell in `shortfall`.
struct RejectSampleResult {
    Population population;
    bool complete = true;
    std::string shortfall;
};
RejectSampleResult reject_sample_partial(const TrainedGenerator &model,
                                         const MarginalTable &quota_table, double budget_factor,
                                         std::uint64_t seed);

// micro_sample is required for baseline/hybrid, model for standalone/hybrid;
// reference (zone ground truth) enables the metric report.
ZoneOutcome run_zone(const ZoneJob &job, const Population *micro_sample,
                     const TrainedGenerator *model, const Population *reference);

struct SummaryRow {
    Strategy strategy;
    ZoneStatus status;
    int zones = 0;
    double avg_rssz = 0.0, std_rssz = 0.0;
    std::vector<std::pair<std::string, std::pair<double, double>>> tvc; // attr -> (avg, std)
};

struct ExperimentResult {
    std::vector<ZoneOutcome> outcomes;  // ordered by zone id
    std::vector<SummaryRow> summary;    // grouped by (strategy, status)
};

// Processes zones independently (optionally with `jobs` worker threads),
// classifies each outcome and aggregates the per-status summary.
ExperimentResult run_experiment(std::vector<ZoneJob> zones, const Population *micro_sample,
                                const TrainedGenerator *model,
                                const std::map<std::string, const Population *> &references,
                                int jobs = 1);

void write_outcomes_csv(const ExperimentResult &result, std::ostream &out);
void write_summary_csv(const ExperimentResult &result, std::ostream &out);

} // namespace popsynth
