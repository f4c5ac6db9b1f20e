#include "popsynth/csv.hpp"
#include "popsynth/ctgan.hpp"
#include "popsynth/errors.hpp"
#include "popsynth/ground_truth.hpp"
#include "popsynth/log.hpp"
#include "popsynth/manifest.hpp"
#include "popsynth/metrics.hpp"
#include "popsynth/pipeline.hpp"
#include "popsynth/rng.hpp"
#include "popsynth/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace popsynth;

namespace {

// exit codes: 0 ok, 2 usage, 3 data, 4 numeric, 5 io
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitIo = 5;

void ensure_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string &dir, const std::string &name) {
    return (fs::path(dir) / name).string();
}


// population CSV with a leading zone_id column
void save_zoned_population(const std::string &path, const Population &pop,
                           const std::vector<std::string> &zone_of_row) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    std::vector<std::string> fields{"zone_id"};
    for (const auto &attr : pop.schema().attributes()) fields.push_back(attr.name);
    csv::write_row(out, fields);
    for (std::size_t r = 0; r < pop.size(); ++r) {
        fields.clear();
        fields.push_back(zone_of_row[r]);
        for (std::size_t a = 0; a < pop.schema().attribute_count(); ++a)
            fields.push_back(pop.label(r, a));
        csv::write_row(out, fields);
    }
}

// extracts one named raw column, row order preserved
std::vector<std::string> read_raw_column(const std::string &path, const std::string &column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    auto records = csv::read_all(in);
    if (records.empty()) throw DataError("'" + path + "': missing header");
    std::size_t col = records.front().size();
    for (std::size_t c = 0; c < records.front().size(); ++c)
        if (records.front()[c] == column) col = c;
    if (col == records.front().size())
        throw DataError("'" + path + "': missing column '" + column + "'");
    std::vector<std::string> values;
    values.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (col >= records[r].size()) throw DataError("'" + path + "': short row");
        values.push_back(records[r][col]);
    }
    return values;
}

struct GenWorldArgs {
    std::string spec_path;
    std::string out_dir;
};

int cmd_gen_world(const GenWorldArgs &args) {
    RunManifest manifest;
    manifest.command = "gen-world";
    manifest.started_at = iso8601_now();
    manifest.add_input(args.spec_path);

    const GroundTruthSpec spec = load_ground_truth_spec(args.spec_path);
    manifest.seed = spec.seed;
    const World world = generate_ground_truth(spec);

    ensure_dir(args.out_dir);
    const std::string gt_path = join_path(args.out_dir, "ground_truth.csv");
    std::vector<std::string> zone_col(world.ground_truth.size());
    for (std::size_t r = 0; r < world.ground_truth.size(); ++r)
        zone_col[r] = world.zone_of_row[r] == World::npos ? std::string{}
                                                          : world.zone_ids[world.zone_of_row[r]];
    save_zoned_population(gt_path, world.ground_truth, zone_col);

    const std::string ms_path = join_path(args.out_dir, "micro_sample.csv");
    save_population(world.micro_sample, ms_path);

    const std::string zt_path = join_path(args.out_dir, "zone_targets.csv");
    if (!world.zone_targets.empty()) save_marginals(world.zone_targets, zt_path);

    std::cout << "world: " << world.ground_truth.size() << " agents, "
              << world.micro_sample.size() << " sampled, " << world.zone_targets.size()
              << " zones -> " << args.out_dir << "\n";

    manifest.add_output(gt_path);
    manifest.add_output(ms_path);
    if (!world.zone_targets.empty()) manifest.add_output(zt_path);
    nlohmann::json cfg{{"spec", args.spec_path}};
    manifest.config_json = cfg.dump();
    manifest.finished_at = iso8601_now();
    manifest.write(join_path(args.out_dir, "manifest.json"));
    return 0;
}

struct TrainArgs {
    std::string schema_path;
    std::string micro_sample_path;
    std::string out_dir;
    TrainConfig config;
};

int cmd_train(const TrainArgs &args) {
    RunManifest manifest;
    manifest.command = "train";
    manifest.started_at = iso8601_now();
    manifest.seed = args.config.seed;
    manifest.add_input(args.schema_path);
    manifest.add_input(args.micro_sample_path);

    auto schema = load_schema(args.schema_path);
    auto sample = load_population(args.micro_sample_path, schema, Provenance::micro_sample);
    const TrainedGenerator model = train(sample, args.config);

    ensure_dir(args.out_dir);
    const std::string ckpt_path = join_path(args.out_dir, "checkpoint.bin");
    model.save(ckpt_path);
    const std::string loss_path = join_path(args.out_dir, "loss.csv");
    {
        std::ofstream out(loss_path, std::ios::binary);
        if (!out) throw IoError("cannot write '" + loss_path + "'");
        model.write_loss_csv(out);
    }

    std::cout << "trained " << args.config.epochs << " epochs on " << sample.size()
              << " rows -> " << ckpt_path << "\n";

    manifest.add_output(ckpt_path);
    manifest.add_output(loss_path);
    nlohmann::json cfg{{"epochs", args.config.epochs},     {"batch_size", args.config.batch_size},
                       {"z_dim", args.config.z_dim},       {"hidden", args.config.hidden},
                       {"tau", args.config.tau},           {"pac_size", args.config.pac_size},
                       {"gp_lambda", args.config.gp_lambda}};
    manifest.config_json = cfg.dump();
    manifest.finished_at = iso8601_now();
    manifest.write(join_path(args.out_dir, "manifest.json"));
    return 0;
}

struct SynthesizeArgs {
    std::string config_path; // experiment config file; flags override it
    std::string strategy;
    std::string schema_path;
    std::string micro_sample_path;
    std::string targets_path;
    std::string checkpoint_path;
    std::string ground_truth_path; // optional reference with zone_id column
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    double rssz_threshold = 1.0;
    double budget_factor = 10.0;
    std::size_t pool_multiplier = 2;
    std::uint64_t max_iterations = 100000;
    int restarts = 5;
    int jobs = 1;
    bool trace = false;
};

// values from the experiment config file fill every option the command line
// left unset
void merge_experiment_config(SynthesizeArgs &args, const CLI::App &cmd) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + args.config_path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("experiment config: invalid JSON: ") + e.what());
    }
    auto unset = [&](const std::string &flag) { return cmd.count(flag) == 0; };
    if (unset("--strategy") && doc.contains("strategy")) args.strategy = doc["strategy"];
    if (unset("--schema") && doc.contains("schema")) args.schema_path = doc["schema"];
    if (unset("--micro-sample") && doc.contains("micro_sample"))
        args.micro_sample_path = doc["micro_sample"];
    if (unset("--targets") && doc.contains("targets")) args.targets_path = doc["targets"];
    if (unset("--checkpoint") && doc.contains("checkpoint"))
        args.checkpoint_path = doc["checkpoint"];
    if (unset("--ground-truth") && doc.contains("ground_truth"))
        args.ground_truth_path = doc["ground_truth"];
    if (unset("--out-dir") && doc.contains("out_dir")) args.out_dir = doc["out_dir"];
    if (unset("--seed") && doc.contains("seed")) args.seed = doc["seed"].get<std::uint64_t>();
    if (unset("--rssz-threshold") && doc.contains("rssz_threshold"))
        args.rssz_threshold = doc["rssz_threshold"];
    if (unset("--budget-factor") && doc.contains("budget_factor"))
        args.budget_factor = doc["budget_factor"];
    if (unset("--pool-multiplier") && doc.contains("pool_multiplier"))
        args.pool_multiplier = doc["pool_multiplier"].get<std::size_t>();
    if (unset("--max-iterations") && doc.contains("max_iterations"))
        args.max_iterations = doc["max_iterations"].get<std::uint64_t>();
    if (unset("--restarts") && doc.contains("restarts")) args.restarts = doc["restarts"];
    if (unset("--jobs") && doc.contains("jobs")) args.jobs = doc["jobs"];
    if (unset("--trace") && doc.contains("trace")) args.trace = doc["trace"];
}

int cmd_synthesize(const SynthesizeArgs &args) {
    if (args.strategy.empty()) throw CLI::ValidationError("--strategy is required");
    if (args.schema_path.empty()) throw CLI::ValidationError("--schema is required");
    if (args.targets_path.empty()) throw CLI::ValidationError("--targets is required");
    if (args.out_dir.empty()) throw CLI::ValidationError("--out-dir is required");
    if (!args.seed) throw CLI::ValidationError("--seed is required (no wall-clock seeding)");
    const std::uint64_t seed = *args.seed;

    const Strategy strategy = strategy_from_string(args.strategy);
    const bool needs_pool = strategy != Strategy::standalone;
    const bool needs_model = strategy != Strategy::baseline;
    if (needs_pool && args.micro_sample_path.empty())
        throw CLI::ValidationError("--micro-sample is required for " + args.strategy);
    if (needs_model && args.checkpoint_path.empty())
        throw CLI::ValidationError("--checkpoint is required for " + args.strategy);

    RunManifest manifest;
    manifest.command = "synthesize";
    manifest.started_at = iso8601_now();
    manifest.seed = seed;
    if (!args.config_path.empty()) manifest.add_input(args.config_path);
    manifest.add_input(args.schema_path);
    manifest.add_input(args.targets_path);

    auto schema = load_schema(args.schema_path);
    auto targets = load_marginals(args.targets_path, schema);

    std::optional<Population> micro_sample;
    if (!args.micro_sample_path.empty()) {
        manifest.add_input(args.micro_sample_path);
        micro_sample = load_population(args.micro_sample_path, schema, Provenance::micro_sample);
    }
    std::optional<TrainedGenerator> model;
    if (!args.checkpoint_path.empty()) {
        manifest.add_input(args.checkpoint_path);
        model = TrainedGenerator::load(args.checkpoint_path);
        if (model->schema_fingerprint != schema->fingerprint())
            throw DataError("checkpoint schema does not match --schema");
    }

    // optional zone references for unconditioned-attribute metrics
    std::map<std::string, Population> reference_store;
    std::map<std::string, const Population *> references;
    if (!args.ground_truth_path.empty()) {
        manifest.add_input(args.ground_truth_path);
        auto zone_col = read_raw_column(args.ground_truth_path, "zone_id");
        auto all = load_population(args.ground_truth_path, schema, Provenance::ground_truth);
        if (zone_col.size() != all.size())
            throw DataError("ground truth: zone column length mismatch");
        std::map<std::string, std::vector<Population::Row>> by_zone;
        for (std::size_t r = 0; r < all.size(); ++r)
            if (!zone_col[r].empty()) by_zone[zone_col[r]].push_back(all.row(r));
        for (auto &[zone, rows] : by_zone)
            reference_store.emplace(zone,
                                    Population(schema, std::move(rows), Provenance::ground_truth));
        for (const auto &[zone, pop] : reference_store) references[zone] = &pop;
    }

    // one job per zone: tabulations are the per-attribute singles plus the joint
    std::vector<ZoneJob> jobs;
    for (const auto &joint : targets) {
        ZoneJob job;
        job.zone_id = joint.zone_id();
        job.strategy = strategy;
        job.seed = derive_seed(seed, "zone-" + joint.zone_id());
        job.rssz_threshold = args.rssz_threshold;
        job.budget_factor = args.budget_factor;
        job.pool_multiplier = args.pool_multiplier;
        job.fbsco.max_iterations = args.max_iterations;
        job.fbsco.restarts = args.restarts;
        job.fbsco.record_trace = args.trace;
        if (joint.attrs().size() > 1) {
            for (const auto &attr : joint.attrs()) {
                MarginalTable single(schema, joint.zone_id(), {attr});
                std::size_t pos = 0;
                for (std::size_t k = 0; k < joint.attrs().size(); ++k)
                    if (joint.attrs()[k] == attr) pos = k;
                for (std::size_t flat = 0; flat < joint.n_cells(); ++flat)
                    if (joint.count_at(flat) > 0)
                        single.add_count(single.flat_of({joint.tuple_of(flat)[pos]}),
                                         joint.count_at(flat));
                job.targets.push_back(std::move(single));
            }
        }
        job.targets.push_back(joint);
        jobs.push_back(std::move(job));
    }

    const ExperimentResult result =
        run_experiment(std::move(jobs), micro_sample ? &*micro_sample : nullptr,
                       model ? &*model : nullptr, references, args.jobs);

    ensure_dir(args.out_dir);
    ensure_dir(join_path(args.out_dir, "zones"));
    std::vector<std::string> zone_col;
    std::vector<Population::Row> all_rows;
    for (const auto &outcome : result.outcomes) {
        const std::string zone_path =
            join_path(join_path(args.out_dir, "zones"), outcome.zone_id + ".csv");
        save_population(outcome.synthetic, zone_path);
        manifest.add_output(zone_path);
        if (args.trace && !outcome.trace.empty()) {
            const std::string trace_path =
                join_path(join_path(args.out_dir, "zones"), outcome.zone_id + "_trace.csv");
            std::ofstream trace_out(trace_path, std::ios::binary);
            trace_out << "iteration,rssz\n";
            for (const auto &[iter, value] : outcome.trace)
                trace_out << iter << ',' << value << '\n';
            manifest.add_output(trace_path);
        }
        for (const auto &row : outcome.synthetic.rows()) {
            all_rows.push_back(row);
            zone_col.push_back(outcome.zone_id);
        }
    }
    Population combined(schema, std::move(all_rows), Provenance::synthetic);
    const std::string all_path = join_path(args.out_dir, "all_zones.csv");
    save_zoned_population(all_path, combined, zone_col);

    const std::string outcomes_path = join_path(args.out_dir, "outcomes.csv");
    {
        std::ofstream out(outcomes_path, std::ios::binary);
        write_outcomes_csv(result, out);
    }
    const std::string summary_path = join_path(args.out_dir, "summary.csv");
    {
        std::ofstream out(summary_path, std::ios::binary);
        write_summary_csv(result, out);
    }

    int ok = 0, fail = 0, empty = 0;
    for (const auto &o : result.outcomes) {
        if (o.status == ZoneStatus::successful) ++ok;
        else if (o.status == ZoneStatus::unsuccessful) ++fail;
        else ++empty;
    }
    std::cout << args.strategy << ": " << ok << " successful, " << fail << " unsuccessful, "
              << empty << " without population -> " << args.out_dir << "\n";

    manifest.add_output(all_path);
    manifest.add_output(outcomes_path);
    manifest.add_output(summary_path);
    nlohmann::json cfg{{"strategy", args.strategy},
                       {"rssz_threshold", args.rssz_threshold},
                       {"budget_factor", args.budget_factor},
                       {"pool_multiplier", args.pool_multiplier},
                       {"max_iterations", args.max_iterations},
                       {"restarts", args.restarts}};
    manifest.config_json = cfg.dump();
    manifest.finished_at = iso8601_now();
    manifest.write(join_path(args.out_dir, "manifest.json"));
    return 0;
}

struct EvaluateArgs {
    std::string schema_path;
    std::string synthetic_path;
    std::string reference_path;
    std::string reference_marginals_path;
    std::string out_dir;
    std::string scatter_attr;
    std::string zone_column;
    bool exclude_na = false;
};

int cmd_evaluate(const EvaluateArgs &args) {
    if (args.reference_path.empty() && args.reference_marginals_path.empty())
        throw CLI::ValidationError("--reference or --reference-marginals is required");

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.started_at = iso8601_now();
    manifest.add_input(args.schema_path);
    manifest.add_input(args.synthetic_path);

    auto schema = load_schema(args.schema_path);
    auto synth = load_population(args.synthetic_path, schema, Provenance::synthetic);
    if (synth.is_empty()) throw DataError("evaluate: synthetic population is empty");
    const NaMode mode = args.exclude_na ? NaMode::exclude : NaMode::include;

    ensure_dir(args.out_dir);
    const std::string report_path = join_path(args.out_dir, "report.csv");

    std::string scatter_attr = args.scatter_attr;
    if (scatter_attr.empty()) {
        scatter_attr = schema->attribute(schema->attribute_count() - 1).name;
        if (schema->find("WORK")) scatter_attr = "WORK";
    }
    std::vector<std::pair<double, double>> points;

    if (!args.reference_path.empty()) {
        manifest.add_input(args.reference_path);
        auto reference = load_population(args.reference_path, schema, Provenance::ground_truth);
        if (reference.is_empty()) throw DataError("evaluate: reference population is empty");

        std::vector<std::string> all_attrs;
        for (const auto &attr : schema->attributes()) all_attrs.push_back(attr.name);
        const MetricReport report = evaluate(reference, synth, {}, all_attrs, mode);
        std::ofstream out(report_path, std::ios::binary);
        report.to_csv(out);

        const std::size_t sa = schema->index_of(scatter_attr);
        if (!args.zone_column.empty()) {
            auto ref_zones = read_raw_column(args.reference_path, args.zone_column);
            auto syn_zones = read_raw_column(args.synthetic_path, args.zone_column);
            std::map<std::pair<std::string, std::uint16_t>, std::pair<double, double>> cells;
            for (std::size_t r = 0; r < reference.size(); ++r)
                cells[{ref_zones[r], reference.code(r, sa)}].first += 1.0;
            for (std::size_t r = 0; r < synth.size(); ++r)
                cells[{syn_zones[r], synth.code(r, sa)}].second += 1.0;
            for (const auto &[key, counts] : cells) points.push_back(counts);
        } else {
            std::vector<double> ref_counts(schema->cardinality(sa), 0.0);
            std::vector<double> syn_counts(schema->cardinality(sa), 0.0);
            for (std::size_t r = 0; r < reference.size(); ++r) ref_counts[reference.code(r, sa)] += 1;
            for (std::size_t r = 0; r < synth.size(); ++r) syn_counts[synth.code(r, sa)] += 1;
            for (std::size_t c = 0; c < ref_counts.size(); ++c)
                points.emplace_back(ref_counts[c], syn_counts[c]);
        }
    } else {
        manifest.add_input(args.reference_marginals_path);
        auto tables = load_marginals(args.reference_marginals_path, schema);
        if (tables.empty()) throw DataError("evaluate: no reference marginals");
        // pool all zones into one table per attribute set
        MarginalTable pooled(schema, "(all)", tables.front().attrs());
        for (const auto &t : tables) {
            if (t.attrs() != pooled.attrs())
                throw DataError("evaluate: reference marginals must share one attribute set");
            for (std::size_t flat = 0; flat < t.n_cells(); ++flat)
                pooled.add_count(flat, t.count_at(flat));
        }
        MetricReport report;
        for (const auto &attr : pooled.attrs()) {
            AttributeScores scores;
            scores.tvc = tvc_against_marginal(pooled, synth, attr);
            report.per_attribute.emplace_back(attr, scores);
        }
        std::ofstream out(report_path, std::ios::binary);
        report.to_csv(out);

        // scatter over the pooled table's cells
        CategoricalHistogram synth_hist =
            CategoricalHistogram::from_population(synth, pooled.attrs(), mode);
        for (std::size_t flat = 0; flat < pooled.n_cells(); ++flat)
            points.emplace_back(static_cast<double>(pooled.count_at(flat)),
                                static_cast<double>(synth_hist.count_at(flat)));
    }

    ScatterOptions options;
    options.title = scatter_attr + " category counts";
    double r2 = 0.0;
    try {
        r2 = r_squared(points);
    } catch (const DataError &) {
        options.annotate_r_squared = false;
    }
    options.r_squared = r2;
    const std::string svg_path = join_path(args.out_dir, "scatter.svg");
    write_scatter_svg(svg_path, points, options);

    std::cout << "report -> " << report_path << " (scatter R2 " << r2 << ")\n";

    manifest.add_output(report_path);
    manifest.add_output(svg_path);
    nlohmann::json cfg{{"scatter_attr", scatter_attr}, {"exclude_na", args.exclude_na}};
    manifest.config_json = cfg.dump();
    manifest.finished_at = iso8601_now();
    manifest.write(join_path(args.out_dir, "manifest.json"));
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"popsynth: synthetic population toolkit"};
    app.require_subcommand(1);

    GenWorldArgs gen_args;
    auto *gen = app.add_subcommand("gen-world", "generate a synthetic ground-truth world");
    gen->add_option("--spec", gen_args.spec_path, "world spec JSON")->required();
    gen->add_option("--out-dir", gen_args.out_dir, "output directory")->required();

    TrainArgs train_args;
    auto *tr = app.add_subcommand("train", "train the conditional generator");
    tr->add_option("--schema", train_args.schema_path, "schema JSON")->required();
    tr->add_option("--micro-sample", train_args.micro_sample_path, "training population CSV")
        ->required();
    tr->add_option("--out-dir", train_args.out_dir, "output directory")->required();
    tr->add_option("--seed", train_args.config.seed, "random seed")->required();
    tr->add_option("--epochs", train_args.config.epochs, "training epochs");
    tr->add_option("--batch-size", train_args.config.batch_size, "batch size");
    tr->add_option("--z-dim", train_args.config.z_dim, "latent width");
    tr->add_option("--hidden", train_args.config.hidden, "hidden width");
    tr->add_option("--tau", train_args.config.tau, "gumbel-softmax temperature");
    tr->add_option("--pac-size", train_args.config.pac_size, "samples per critic group");
    tr->add_option("--gp-lambda", train_args.config.gp_lambda, "gradient penalty weight");

    SynthesizeArgs syn_args;
    auto *syn = app.add_subcommand("synthesize", "synthesize zone populations");
    syn->add_option("--config", syn_args.config_path,
                    "experiment config JSON; explicit flags take precedence");
    syn->add_option("--strategy", syn_args.strategy, "baseline|standalone|hybrid");
    syn->add_option("--schema", syn_args.schema_path, "schema JSON");
    syn->add_option("--targets", syn_args.targets_path, "zone marginal CSV");
    syn->add_option("--seed", syn_args.seed, "random seed");
    syn->add_option("--out-dir", syn_args.out_dir, "output directory");
    syn->add_option("--micro-sample", syn_args.micro_sample_path, "candidate pool CSV");
    syn->add_option("--checkpoint", syn_args.checkpoint_path, "trained generator checkpoint");
    syn->add_option("--ground-truth", syn_args.ground_truth_path,
                    "reference CSV with zone_id column (enables metrics)");
    syn->add_option("--rssz-threshold", syn_args.rssz_threshold, "success threshold");
    syn->add_option("--budget-factor", syn_args.budget_factor, "reject sampling budget factor");
    syn->add_option("--pool-multiplier", syn_args.pool_multiplier, "hybrid pool size multiplier");
    syn->add_option("--max-iterations", syn_args.max_iterations, "search iterations per restart");
    syn->add_option("--restarts", syn_args.restarts, "search restarts");
    syn->add_option("--jobs", syn_args.jobs, "parallel zone workers");
    syn->add_flag("--trace", syn_args.trace, "write per-zone search trace CSVs");

    EvaluateArgs eval_args;
    auto *ev = app.add_subcommand("evaluate", "score a synthetic population");
    ev->add_option("--schema", eval_args.schema_path, "schema JSON")->required();
    ev->add_option("--synthetic", eval_args.synthetic_path, "synthetic population CSV")->required();
    ev->add_option("--out-dir", eval_args.out_dir, "output directory")->required();
    ev->add_option("--reference", eval_args.reference_path, "reference population CSV");
    ev->add_option("--reference-marginals", eval_args.reference_marginals_path,
                   "reference marginal CSV");
    ev->add_option("--scatter-attr", eval_args.scatter_attr, "attribute for the scatter plot");
    ev->add_option("--zone-column", eval_args.zone_column,
                   "zone column shared by both CSVs (per-zone scatter)");
    ev->add_flag("--exclude-na", eval_args.exclude_na, "drop NA rows per attribute");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_world(gen_args);
        if (tr->parsed()) return cmd_train(train_args);
        if (syn->parsed()) {
            if (!syn_args.config_path.empty()) merge_experiment_config(syn_args, *syn);
            return cmd_synthesize(syn_args);
        }
        if (ev->parsed()) return cmd_evaluate(eval_args);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const CLI::ValidationError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BudgetError &e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const NumericError &e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError &e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
