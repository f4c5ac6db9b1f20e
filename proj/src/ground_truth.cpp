#include "popsynth/ground_truth.hpp"

#include "popsynth/errors.hpp"
#include "popsynth/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace popsynth {

namespace {

constexpr std::uint64_t kMaxJointCells = 10'000'000;
constexpr double kProbTolerance = 1e-9;

std::uint64_t full_cell_count(const Schema &schema) {
    std::uint64_t n = 1;
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
        n *= schema.cardinality(a);
        if (n > kMaxJointCells) throw DataError("ground truth: joint table too large");
    }
    return n;
}

Population::Row decode_cell(const Schema &schema, std::uint64_t flat) {
    Population::Row row(schema.attribute_count());
    for (std::size_t a = schema.attribute_count(); a-- > 0;) {
        const std::uint64_t card = schema.cardinality(a);
        row[a] = static_cast<std::uint16_t>(flat % card);
        flat /= card;
    }
    return row;
}

} // namespace

std::vector<double> joint_distribution(const GroundTruthSpec &spec) {
    if (!spec.schema) throw DataError("ground truth: null schema");
    const Schema &schema = *spec.schema;
    const std::uint64_t n_cells = full_cell_count(schema);

    std::vector<double> joint;
    if (!spec.explicit_joint.empty()) {
        if (spec.explicit_joint.size() != n_cells)
            throw DataError("ground truth: explicit joint has wrong cell count");
        double sum = 0.0;
        for (double p : spec.explicit_joint) {
            if (p < 0.0) throw DataError("ground truth: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbTolerance)
            throw DataError("ground truth: explicit joint does not sum to 1");
        joint = spec.explicit_joint;
    } else {
        if (spec.factored.size() != schema.attribute_count())
            throw DataError("ground truth: factored form needs one distribution per attribute");
        std::vector<std::vector<double>> factored = spec.factored;
        for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
            auto &dist = factored[a];
            // a distribution over the real categories leaves the NA slot at 0
            if (dist.size() == schema.real_cardinality(a) &&
                schema.cardinality(a) == dist.size() + 1)
                dist.push_back(0.0);
            if (dist.size() != schema.cardinality(a))
                throw DataError("ground truth: distribution size mismatch for '" +
                                schema.attribute(a).name + "'");
            double sum = 0.0;
            for (double p : dist) {
                if (p < 0.0) throw DataError("ground truth: negative probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kProbTolerance)
                throw DataError("ground truth: per-attribute distribution does not sum to 1 for '" +
                                schema.attribute(a).name + "'");
        }
        joint.assign(n_cells, 0.0);
        for (std::uint64_t flat = 0; flat < n_cells; ++flat) {
            auto row = decode_cell(schema, flat);
            double p = 1.0;
            for (std::size_t a = 0; a < schema.attribute_count(); ++a) p *= factored[a][row[a]];
            joint[flat] = p;
        }
        // dependency injections: boost cells whose category indices align
        for (const auto &inj : spec.injections) {
            if (inj.strength < 0.0) throw DataError("ground truth: negative injection strength");
            const std::size_t a = schema.index_of(inj.attr_a);
            const std::size_t b = schema.index_of(inj.attr_b);
            if (a == b) throw DataError("ground truth: self injection");
            const std::uint64_t card_b = schema.cardinality(b);
            for (std::uint64_t flat = 0; flat < n_cells; ++flat) {
                auto row = decode_cell(schema, flat);
                if (row[a] % card_b == row[b]) joint[flat] *= 1.0 + inj.strength;
            }
        }
        const double sum = std::accumulate(joint.begin(), joint.end(), 0.0);
        if (sum <= 0.0) throw DataError("ground truth: joint vanished after injections");
        for (double &p : joint) p /= sum;
    }
    return joint;
}

World generate_ground_truth(const GroundTruthSpec &spec) {
    const Schema &schema = *spec.schema;
    std::uint64_t zones_total = 0;
    for (auto z : spec.zone_sizes) zones_total += z;
    if (spec.population_size < zones_total)
        throw DataError("ground truth: population_size smaller than the zone sizes sum");
    if (spec.micro_sample_fraction < 0.0 || spec.micro_sample_fraction > 1.0)
        throw DataError("ground truth: micro_sample_fraction must be in [0,1]");
    if (spec.zone_attrs.empty() && !spec.zone_sizes.empty())
        throw DataError("ground truth: zone_attrs required when zones are requested");

    const auto joint = joint_distribution(spec);
    std::vector<double> cdf(joint.size());
    std::partial_sum(joint.begin(), joint.end(), cdf.begin());

    Rng rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Population::Row> rows;
    rows.reserve(spec.population_size);
    for (std::uint64_t i = 0; i < spec.population_size; ++i) {
        const double u = unit(rng);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        const std::uint64_t flat =
            it == cdf.end() ? joint.size() - 1 : static_cast<std::uint64_t>(it - cdf.begin());
        rows.push_back(decode_cell(schema, flat));
    }
    Population ground_truth(spec.schema, std::move(rows), Provenance::ground_truth);

    // uniform random subset for the micro sample
    const std::size_t n = ground_truth.size();
    const std::size_t m =
        static_cast<std::size_t>(std::floor(spec.micro_sample_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> chosen(order.begin(), order.begin() + m);
    std::sort(chosen.begin(), chosen.end());
    std::vector<Population::Row> sample_rows;
    sample_rows.reserve(m);
    for (std::size_t idx : chosen) sample_rows.push_back(ground_truth.row(idx));
    Population micro_sample(spec.schema, std::move(sample_rows), Provenance::micro_sample);

    // zones: contiguous blocks of a fresh shuffle
    std::vector<std::size_t> zone_order(n);
    std::iota(zone_order.begin(), zone_order.end(), 0);
    std::shuffle(zone_order.begin(), zone_order.end(), rng);

    World world{std::move(ground_truth), std::move(micro_sample), {}, {}, {}, {}};
    world.zone_of_row.assign(n, World::npos);
    std::size_t cursor = 0;
    const int width = spec.zone_sizes.size() >= 1000 ? 6 : 3;
    for (std::size_t z = 0; z < spec.zone_sizes.size(); ++z) {
        std::ostringstream id;
        id << 'Z';
        id.width(width);
        id.fill('0');
        id << (z + 1);
        std::vector<std::size_t> block(zone_order.begin() + cursor,
                                       zone_order.begin() + cursor + spec.zone_sizes[z]);
        cursor += spec.zone_sizes[z];
        std::sort(block.begin(), block.end());
        std::vector<Population::Row> zone_rows;
        zone_rows.reserve(block.size());
        for (std::size_t idx : block) {
            zone_rows.push_back(world.ground_truth.row(idx));
            world.zone_of_row[idx] = z;
        }
        Population zone_pop(spec.schema, std::move(zone_rows), Provenance::ground_truth);
        world.zone_targets.push_back(aggregate_marginals(zone_pop, spec.zone_attrs, id.str()));
        world.zone_truths.push_back(std::move(zone_pop));
        world.zone_ids.push_back(id.str());
    }
    return world;
}

GroundTruthSpec parse_ground_truth_spec_json(const std::string &text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("world spec: invalid JSON: ") + e.what());
    }
    GroundTruthSpec spec;
    if (!doc.contains("schema")) throw DataError("world spec: missing 'schema'");
    spec.schema = parse_schema_json(doc["schema"].dump());
    spec.population_size = doc.value("population_size", 0ULL);
    spec.seed = doc.value("seed", 0ULL);
    spec.micro_sample_fraction = doc.value("micro_sample_fraction", 0.1);
    if (doc.contains("zone_sizes"))
        for (const auto &v : doc["zone_sizes"]) spec.zone_sizes.push_back(v.get<std::uint64_t>());
    if (doc.contains("zone_attrs"))
        for (const auto &v : doc["zone_attrs"]) spec.zone_attrs.push_back(v.get<std::string>());

    if (doc.contains("joint")) {
        const auto &joint = doc["joint"];
        const std::string type = joint.value("type", "factored");
        if (type == "explicit") {
            for (const auto &v : joint["probabilities"]) spec.explicit_joint.push_back(v.get<double>());
        } else if (type == "factored") {
            const auto &marg = joint["marginals"];
            for (const auto &attr : spec.schema->attributes()) {
                if (!marg.contains(attr.name))
                    throw DataError("world spec: missing marginal for '" + attr.name + "'");
                std::vector<double> dist;
                for (const auto &v : marg[attr.name]) dist.push_back(v.get<double>());
                spec.factored.push_back(std::move(dist));
            }
            if (joint.contains("injections")) {
                for (const auto &node : joint["injections"]) {
                    PairwiseInjection inj;
                    inj.attr_a = node.at("attr_a").get<std::string>();
                    inj.attr_b = node.at("attr_b").get<std::string>();
                    inj.strength = node.value("strength", 0.0);
                    spec.injections.push_back(std::move(inj));
                }
            }
        } else {
            throw DataError("world spec: joint type must be 'explicit' or 'factored'");
        }
    } else {
        throw DataError("world spec: missing 'joint'");
    }
    return spec;
}

GroundTruthSpec load_ground_truth_spec(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("world spec: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ground_truth_spec_json(buf.str());
}

} // namespace popsynth
