#include "popsynth/pipeline.hpp"

#include "popsynth/csv.hpp"
#include "popsynth/errors.hpp"
#include "popsynth/log.hpp"
#include "popsynth/rng.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

namespace popsynth {

const char *to_string(Strategy s) {
    switch (s) {
    case Strategy::baseline: return "baseline";
    case Strategy::standalone: return "standalone";
    case Strategy::hybrid: return "hybrid";
    }
    return "baseline";
}

const char *to_string(ZoneStatus s) {
    switch (s) {
    case ZoneStatus::successful: return "successful";
    case ZoneStatus::unsuccessful: return "unsuccessful";
    case ZoneStatus::no_population: return "no_population";
    }
    return "unsuccessful";
}

Strategy strategy_from_string(const std::string &name) {
    if (name == "baseline") return Strategy::baseline;
    if (name == "standalone") return Strategy::standalone;
    if (name == "hybrid") return Strategy::hybrid;
    throw DataError("unknown strategy '" + name + "'");
}

namespace {

std::int64_t job_target_total(const ZoneJob &job) {
    if (job.targets.empty()) throw DataError("zone '" + job.zone_id + "': no targets");
    const std::int64_t total = job.targets.front().total();
    for (const auto &t : job.targets) {
        if (t.zone_id() != job.zone_id)
            throw DataError("zone '" + job.zone_id + "': target zone id mismatch");
        if (t.total() != total)
            throw DataError("zone '" + job.zone_id + "': inconsistent target totals");
    }
    return total;
}

// the tabulation whose attributes cover all others (the joint)
const MarginalTable &joint_target(const ZoneJob &job) {
    const MarginalTable *best = nullptr;
    for (const auto &t : job.targets)
        if (best == nullptr || t.attrs().size() > best->attrs().size()) best = &t;
    for (const auto &t : job.targets)
        for (const auto &attr : t.attrs())
            if (std::find(best->attrs().begin(), best->attrs().end(), attr) == best->attrs().end())
                throw DataError("zone '" + job.zone_id +
                                "': no joint target covering attribute '" + attr + "'");
    return *best;
}

std::vector<std::string> conditioned_attrs(const ZoneJob &job) {
    std::vector<std::string> attrs;
    for (const auto &t : job.targets)
        for (const auto &a : t.attrs())
            if (std::find(attrs.begin(), attrs.end(), a) == attrs.end()) attrs.push_back(a);
    return attrs;
}

void attach_metrics(ZoneOutcome &outcome, const ZoneJob &job, const Population *reference) {
    if (outcome.synthetic.is_empty()) return;
    const auto conditioned = conditioned_attrs(job);
    if (reference != nullptr && !reference->is_empty()) {
        std::vector<std::string> all_attrs;
        for (const auto &attr : outcome.synthetic.schema().attributes())
            all_attrs.push_back(attr.name);
        outcome.metrics = evaluate(*reference, outcome.synthetic, conditioned, all_attrs);
        return;
    }
    // fall back to the targets themselves: TVC per conditioned attribute, CA
    // against the categories the target gives nonzero mass
    MetricReport report;
    const auto &joint = joint_target(job);
    const Schema &schema = outcome.synthetic.schema();
    for (const auto &attr : conditioned) {
        AttributeScores scores;
        scores.tvc = tvc_against_marginal(joint, outcome.synthetic, attr);

        const std::size_t idx = schema.index_of(attr);
        std::size_t pos = 0;
        for (std::size_t k = 0; k < joint.attrs().size(); ++k)
            if (joint.attrs()[k] == attr) pos = k;
        std::vector<bool> present(schema.cardinality(idx), false);
        for (std::size_t flat = 0; flat < joint.n_cells(); ++flat)
            if (joint.count_at(flat) > 0) present[joint.tuple_of(flat)[pos]] = true;
        std::int64_t adherent = 0;
        for (const auto &row : outcome.synthetic.rows())
            if (present[row[idx]]) ++adherent;
        scores.ca = static_cast<double>(adherent) / static_cast<double>(outcome.synthetic.size());
        report.per_attribute.emplace_back(attr, scores);
    }
    outcome.metrics = std::move(report);
}

ZoneOutcome run_fbsco_zone(const ZoneJob &job, const Population &pool, const char *pool_kind) {
    ZoneOutcome outcome;
    outcome.zone_id = job.zone_id;
    outcome.strategy = job.strategy;
    outcome.synthetic = Population::empty(pool.schema_ptr(), Provenance::synthetic);

    FbscoConfig config = job.fbsco;
    config.seed = job.seed;
    config.rssz_threshold = job.rssz_threshold;
    const FbscoResult result = optimize(pool, job.targets, config);
    outcome.stats["iterations"] = static_cast<double>(result.iterations_used);
    outcome.stats["pool_size"] = static_cast<double>(pool.size());
    if (config.record_trace) outcome.trace = result.trace;
    if (result.no_population) {
        outcome.status = ZoneStatus::no_population;
        return outcome;
    }
    outcome.synthetic = materialize(result.selection, pool);
    outcome.rssz = result.rssz;
    outcome.status = result.converged ? ZoneStatus::successful : ZoneStatus::unsuccessful;
    if (!result.converged)
        outcome.diagnostic = std::string(pool_kind) + " search stopped above threshold";
    return outcome;
}

double sample_std(const std::vector<double> &values, double mean) {
    if (values.size() < 2) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

} // namespace

RejectSampleResult reject_sample_partial(const TrainedGenerator &model,
                                         const MarginalTable &quota_table, double budget_factor,
                                         std::uint64_t seed) {
    if (budget_factor < 1.0) throw DataError("reject sampling: budget_factor must be >= 1");
    const Schema &schema = *model.schema;
    if (quota_table.schema().fingerprint() != schema.fingerprint())
        throw DataError("reject sampling: quota schema does not match the model");

    RejectSampleResult result;
    std::vector<Population::Row> rows;
    rows.reserve(static_cast<std::size_t>(quota_table.total()));

    const auto &attr_idx = quota_table.attr_indices();
    for (std::size_t flat = 0; flat < quota_table.n_cells(); ++flat) {
        const std::int64_t quota = quota_table.count_at(flat);
        if (quota == 0) continue;
        const auto tuple = quota_table.tuple_of(flat);

        // condition on the tuple's rarest attribute value in the training data
        std::size_t rare_k = 0;
        std::int64_t rare_count = std::numeric_limits<std::int64_t>::max();
        for (std::size_t k = 0; k < attr_idx.size(); ++k) {
            const std::int64_t c = model.category_counts[attr_idx[k]][tuple[k]];
            if (c < rare_count) {
                rare_count = c;
                rare_k = k;
            }
        }
        const std::string &cond_attr = schema.attribute(attr_idx[rare_k]).name;
        const std::string &cond_value = schema.label_of(attr_idx[rare_k], tuple[rare_k]);

        const std::int64_t budget = static_cast<std::int64_t>(
            budget_factor * static_cast<double>(quota) * 1000.0);
        const std::uint64_t cell_seed = derive_seed(seed, "cell-" + std::to_string(flat));

        std::int64_t produced = 0;
        std::int64_t spent = 0;
        while (produced < quota) {
            if (spent >= budget) {
                std::ostringstream msg;
                msg << "reject sampling: budget exhausted for cell (";
                const auto labels = quota_table.tuple_labels(flat);
                for (std::size_t k = 0; k < labels.size(); ++k)
                    msg << (k ? "," : "") << labels[k];
                msg << "): got " << produced << " of " << quota;
                result.complete = false;
                result.shortfall = msg.str();
                break;
            }
            const std::int64_t chunk = std::clamp<std::int64_t>(
                (quota - produced) * 2, 16, std::min<std::int64_t>(budget - spent, 4096));
            Population batch =
                generate_unfiltered(model, static_cast<std::size_t>(chunk),
                                    std::make_pair(cond_attr, cond_value),
                                    derive_seed(cell_seed, "try-" + std::to_string(spent)));
            spent += chunk;
            for (const auto &row : batch.rows()) {
                if (produced >= quota) break;
                bool match = true;
                for (std::size_t k = 0; k < attr_idx.size(); ++k)
                    if (row[attr_idx[k]] != tuple[k]) {
                        match = false;
                        break;
                    }
                if (match) {
                    rows.push_back(row);
                    ++produced;
                }
            }
        }
        if (!result.complete) break; // first exhausted cell stops the fill
    }
    result.population = Population(model.schema, std::move(rows), Provenance::synthetic);
    return result;
}

Population reject_sample_to_quotas(const TrainedGenerator &model, const MarginalTable &quota_table,
                                   double budget_factor, std::uint64_t seed) {
    RejectSampleResult result = reject_sample_partial(model, quota_table, budget_factor, seed);
    if (!result.complete) throw BudgetError(result.shortfall);
    return std::move(result.population);
}

ZoneOutcome run_zone(const ZoneJob &job, const Population *micro_sample,
                     const TrainedGenerator *model, const Population *reference) {
    const std::int64_t total = job_target_total(job);

    ZoneOutcome outcome;
    outcome.zone_id = job.zone_id;
    outcome.strategy = job.strategy;
    outcome.target_total = total;

    if (total == 0) {
        SchemaPtr schema = !job.targets.empty() ? job.targets.front().schema_ptr() : nullptr;
        outcome.synthetic = Population::empty(schema, Provenance::synthetic);
        outcome.status = ZoneStatus::no_population;
        return outcome;
    }

    switch (job.strategy) {
    case Strategy::baseline: {
        if (micro_sample == nullptr)
            throw DataError("zone '" + job.zone_id + "': baseline needs a micro sample");
        outcome = run_fbsco_zone(job, *micro_sample, "baseline");
        break;
    }
    case Strategy::standalone: {
        if (model == nullptr)
            throw DataError("zone '" + job.zone_id + "': standalone needs a trained model");
        RejectSampleResult fill =
            reject_sample_partial(*model, joint_target(job), job.budget_factor, job.seed);
        outcome.synthetic = std::move(fill.population);
        outcome.status = fill.complete &&
                                 static_cast<std::int64_t>(outcome.synthetic.size()) == total
                             ? ZoneStatus::successful
                             : ZoneStatus::unsuccessful;
        outcome.diagnostic = fill.shortfall;
        break;
    }
    case Strategy::hybrid: {
        if (micro_sample == nullptr || model == nullptr)
            throw DataError("zone '" + job.zone_id + "': hybrid needs micro sample and model");
        const std::size_t pool_size = job.pool_multiplier * micro_sample->size();
        Population pool = generate(*model, pool_size, std::nullopt,
                                   derive_seed(job.seed, "hybrid-pool"));
        outcome = run_fbsco_zone(job, pool, "hybrid");
        outcome.stats["pool_size"] = static_cast<double>(pool_size);
        break;
    }
    }
    outcome.zone_id = job.zone_id;
    outcome.strategy = job.strategy;
    outcome.target_total = total;
    attach_metrics(outcome, job, reference);
    return outcome;
}

ExperimentResult run_experiment(std::vector<ZoneJob> zones, const Population *micro_sample,
                                const TrainedGenerator *model,
                                const std::map<std::string, const Population *> &references,
                                int jobs) {
    std::sort(zones.begin(), zones.end(),
              [](const ZoneJob &a, const ZoneJob &b) { return a.zone_id < b.zone_id; });

    ExperimentResult result;
    result.outcomes.resize(zones.size());

    auto run_one = [&](std::size_t i) {
        const ZoneJob &job = zones[i];
        const Population *ref = nullptr;
        if (auto it = references.find(job.zone_id); it != references.end()) ref = it->second;
        try {
            result.outcomes[i] = run_zone(job, micro_sample, model, ref);
        } catch (const std::exception &e) {
            // a failed zone must not abort the batch
            ZoneOutcome failed;
            failed.zone_id = job.zone_id;
            failed.strategy = job.strategy;
            failed.status = ZoneStatus::unsuccessful;
            failed.diagnostic = e.what();
            SchemaPtr schema = !job.targets.empty() ? job.targets.front().schema_ptr() : nullptr;
            failed.synthetic = Population::empty(schema, Provenance::synthetic);
            result.outcomes[i] = std::move(failed);
            logging::warn("zone " + job.zone_id + " failed: " + e.what());
        }
    };

    if (jobs <= 1 || zones.size() <= 1) {
        for (std::size_t i = 0; i < zones.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        const int n_workers = std::min<int>(jobs, static_cast<int>(zones.size()));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < zones.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto &t : workers) t.join();
    }

    // summary grouped by (strategy, status)
    std::map<std::pair<int, int>, std::vector<const ZoneOutcome *>> groups;
    for (const auto &outcome : result.outcomes)
        groups[{static_cast<int>(outcome.strategy), static_cast<int>(outcome.status)}].push_back(
            &outcome);

    for (const auto &[key, members] : groups) {
        SummaryRow row;
        row.strategy = static_cast<Strategy>(key.first);
        row.status = static_cast<ZoneStatus>(key.second);
        row.zones = static_cast<int>(members.size());

        std::vector<double> rssz_values;
        for (const auto *m : members)
            if (m->rssz) rssz_values.push_back(*m->rssz);
        if (!rssz_values.empty()) {
            double mean = 0.0;
            for (double v : rssz_values) mean += v;
            mean /= static_cast<double>(rssz_values.size());
            row.avg_rssz = mean;
            row.std_rssz = sample_std(rssz_values, mean);
        }

        // per-attribute TVC across members that carry metrics
        std::vector<std::string> attr_order;
        std::map<std::string, std::vector<double>> tvc_values;
        for (const auto *m : members) {
            if (!m->metrics) continue;
            for (const auto &[name, scores] : m->metrics->per_attribute) {
                if (tvc_values.find(name) == tvc_values.end()) attr_order.push_back(name);
                tvc_values[name].push_back(scores.tvc);
            }
        }
        for (const auto &name : attr_order) {
            const auto &vals = tvc_values[name];
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            row.tvc.emplace_back(name, std::make_pair(mean, sample_std(vals, mean)));
        }
        result.summary.push_back(std::move(row));
    }
    return result;
}

void write_outcomes_csv(const ExperimentResult &result, std::ostream &out) {
    // attribute columns from the first outcome that has metrics
    std::vector<std::string> attrs;
    for (const auto &o : result.outcomes)
        if (o.metrics) {
            for (const auto &[name, scores] : o.metrics->per_attribute) attrs.push_back(name);
            break;
        }
    std::vector<std::string> header{"zone_id", "strategy", "status", "target_total",
                                    "rows",    "rssz"};
    for (const auto &a : attrs) header.push_back("tvc_" + a);
    header.push_back("diagnostic");
    csv::write_row(out, header);

    for (const auto &o : result.outcomes) {
        std::vector<std::string> fields{o.zone_id, to_string(o.strategy), to_string(o.status),
                                        std::to_string(o.target_total),
                                        std::to_string(o.synthetic.size()),
                                        o.rssz ? fmt(*o.rssz) : ""};
        for (const auto &a : attrs) {
            std::string cell;
            if (o.metrics)
                for (const auto &[name, scores] : o.metrics->per_attribute)
                    if (name == a) cell = fmt(scores.tvc);
            fields.push_back(cell);
        }
        fields.push_back(o.diagnostic);
        csv::write_row(out, fields);
    }
}

void write_summary_csv(const ExperimentResult &result, std::ostream &out) {
    std::vector<std::string> attrs;
    for (const auto &row : result.summary)
        for (const auto &[name, stats] : row.tvc)
            if (std::find(attrs.begin(), attrs.end(), name) == attrs.end()) attrs.push_back(name);

    std::vector<std::string> header{"strategy", "status", "zones", "avg_rssz", "std_rssz"};
    for (const auto &a : attrs) {
        header.push_back("avg_tvc_" + a);
        header.push_back("std_tvc_" + a);
    }
    csv::write_row(out, header);

    for (const auto &row : result.summary) {
        std::vector<std::string> fields{to_string(row.strategy), to_string(row.status),
                                        std::to_string(row.zones)};
        const bool has_rssz = row.status != ZoneStatus::no_population &&
                              (row.strategy != Strategy::standalone);
        fields.push_back(has_rssz ? fmt(row.avg_rssz) : "");
        fields.push_back(has_rssz ? fmt(row.std_rssz) : "");
        for (const auto &a : attrs) {
            std::string avg, dev;
            for (const auto &[name, stats] : row.tvc)
                if (name == a) {
                    avg = fmt(stats.first);
                    dev = fmt(stats.second);
                }
            fields.push_back(avg);
            fields.push_back(dev);
        }
        csv::write_row(out, fields);
    }
}

} // namespace popsynth
