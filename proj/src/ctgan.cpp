#include "popsynth/ctgan.hpp"

#include "popsynth/errors.hpp"
#include "popsynth/log.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace popsynth {

namespace {

using MatF = nn::Matrix<float>;
using VecF = nn::Vector<float>;

constexpr char kMagic[4] = {'P', 'S', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;
constexpr double kDivergenceLimit = 1e6;

// --- little-endian scalar IO ---------------------------------------------

template <typename T> void write_le(std::ostream &out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T> T read_le(std::istream &in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char *>(bytes), sizeof(T));
    if (!in) throw IoError("checkpoint: truncated file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

void write_matrix(std::ostream &out, const MatF &m) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_le<float>(out, m(r, c));
}

MatF read_matrix(std::istream &in) {
    const auto rows = read_le<std::uint32_t>(in);
    const auto cols = read_le<std::uint32_t>(in);
    MatF m(rows, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_le<float>(in);
    return m;
}

double discrete_draw(const std::vector<double> &cdf, Rng &rng, std::size_t &out_index) {
    std::uniform_real_distribution<double> u(0.0, cdf.back());
    const double draw = u(rng);
    out_index = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), draw) - cdf.begin());
    if (out_index >= cdf.size()) out_index = cdf.size() - 1;
    return draw;
}

// Condition one-hot appended to a data row block.
void fill_condition(const Encoding &enc, const Condition &cond, float *out) {
    for (std::size_t i = 0; i < enc.width; ++i) out[i] = 0.0f;
    out[enc.offset[cond.attr] + cond.value] = 1.0f;
}

} // namespace

// --- Encoding --------------------------------------------------------------

Encoding Encoding::from_schema(SchemaPtr schema) {
    Encoding enc;
    enc.schema = schema;
    enc.offset.resize(schema->attribute_count());
    std::size_t cursor = 0;
    for (std::size_t a = 0; a < schema->attribute_count(); ++a) {
        enc.offset[a] = cursor;
        cursor += schema->cardinality(a);
    }
    enc.width = cursor;
    return enc;
}

std::vector<std::pair<std::size_t, std::size_t>> Encoding::heads() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(offset.size());
    for (std::size_t a = 0; a < offset.size(); ++a)
        out.emplace_back(offset[a], schema->cardinality(a));
    return out;
}

Population::Row Encoding::decode_argmax(const float *vec) const {
    Population::Row row(offset.size());
    for (std::size_t a = 0; a < offset.size(); ++a) {
        const std::size_t card = schema->cardinality(a);
        std::size_t best = 0;
        float best_v = vec[offset[a]];
        for (std::size_t c = 1; c < card; ++c) {
            if (vec[offset[a] + c] > best_v) {
                best_v = vec[offset[a] + c];
                best = c;
            }
        }
        row[a] = static_cast<std::uint16_t>(best);
    }
    return row;
}

// --- ConditionSampler --------------------------------------------------------

ConditionSampler::ConditionSampler(const Population &pop) {
    if (pop.is_empty()) throw DataError("condition sampler: empty population");
    const Schema &schema = pop.schema();
    const std::size_t n_attrs = schema.attribute_count();
    counts_.resize(n_attrs);
    rows_by_value_.resize(n_attrs);
    for (std::size_t a = 0; a < n_attrs; ++a) {
        counts_[a].assign(schema.cardinality(a), 0);
        rows_by_value_[a].resize(schema.cardinality(a));
    }
    for (std::size_t r = 0; r < pop.size(); ++r) {
        for (std::size_t a = 0; a < n_attrs; ++a) {
            const std::uint16_t v = pop.code(r, a);
            counts_[a][v] += 1;
            rows_by_value_[a][v].push_back(static_cast<std::uint32_t>(r));
        }
    }
    log_cdf_.resize(n_attrs);
    raw_cdf_.resize(n_attrs);
    for (std::size_t a = 0; a < n_attrs; ++a) {
        double log_acc = 0.0, raw_acc = 0.0;
        for (std::size_t v = 0; v < counts_[a].size(); ++v) {
            log_acc += std::log1p(static_cast<double>(counts_[a][v]));
            raw_acc += static_cast<double>(counts_[a][v]);
            log_cdf_[a].push_back(log_acc);
            raw_cdf_[a].push_back(raw_acc);
        }
    }
}

Condition ConditionSampler::sample(Rng &rng) const {
    std::uniform_int_distribution<std::size_t> pick_attr(0, counts_.size() - 1);
    Condition cond;
    cond.attr = pick_attr(rng);
    std::size_t idx = 0;
    discrete_draw(log_cdf_[cond.attr], rng, idx);
    cond.value = static_cast<std::uint16_t>(idx);
    return cond;
}

Condition ConditionSampler::sample_original(Rng &rng) const {
    std::uniform_int_distribution<std::size_t> pick_attr(0, counts_.size() - 1);
    Condition cond;
    cond.attr = pick_attr(rng);
    std::size_t idx = 0;
    discrete_draw(raw_cdf_[cond.attr], rng, idx);
    cond.value = static_cast<std::uint16_t>(idx);
    return cond;
}

std::size_t ConditionSampler::sample_row_for(const Condition &cond, Rng &rng) const {
    const auto &rows = rows_by_value_[cond.attr][cond.value];
    if (rows.empty())
        throw DataError("condition sampler: no training rows for the requested value");
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    return rows[pick(rng)];
}

Condition sample_condition(const Population &training_pop, Rng &rng) {
    ConditionSampler sampler(training_pop);
    return sampler.sample(rng);
}

// --- TrainConfig -------------------------------------------------------------

void TrainConfig::validate() const {
    if (epochs < 1) throw DataError("train config: epochs must be >= 1");
    if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
    if (pac_size < 1) throw DataError("train config: pac_size must be >= 1");
    if (batch_size % pac_size != 0)
        throw DataError("train config: batch_size must be divisible by pac_size");
    if (z_dim < 1 || hidden < 1) throw DataError("train config: network dims must be >= 1");
    if (tau <= 0.0) throw DataError("train config: tau must be positive");
    if (gp_lambda < 0.0) throw DataError("train config: gp_lambda must be >= 0");
}

// --- training -----------------------------------------------------------------

TrainedGenerator train(const Population &micro_sample, const TrainConfig &config) {
    config.validate();
    if (micro_sample.is_empty()) throw DataError("train: empty micro sample");

    TrainedGenerator model;
    model.schema = micro_sample.schema_ptr();
    model.encoding = Encoding::from_schema(model.schema);
    model.config = config;
    model.schema_fingerprint = model.schema->fingerprint();

    const Encoding &enc = model.encoding;
    const auto heads = enc.heads();
    const std::size_t data_w = enc.width;
    const std::size_t cond_w = enc.width;
    const std::size_t in0_w = static_cast<std::size_t>(config.z_dim) + cond_w;
    const std::size_t pair_w = data_w + cond_w;
    const int batch = config.batch_size;
    const int pac = config.pac_size;
    const int n_groups = batch / pac;
    const std::size_t critic_in = static_cast<std::size_t>(pac) * pair_w;

    ConditionSampler sampler(micro_sample);
    model.category_counts = sampler.counts();

    Rng rng(config.seed);
    nn::Generator<float> gen;
    gen.init(in0_w, static_cast<std::size_t>(config.hidden), data_w, rng);
    nn::Critic<float> critic;
    critic.init(critic_in, static_cast<std::size_t>(config.hidden), rng);

    nn::Adam<float> adam_g1, adam_g2, adam_g3, adam_d1, adam_d2, adam_d3;
    nn::AdamVec<float> adam_bn1g, adam_bn1b, adam_bn2g, adam_bn2b;
    const auto fg = [&](auto &adam, auto &layer) {
        adam.init(layer, static_cast<float>(config.lr_g), static_cast<float>(config.beta1),
                  static_cast<float>(config.beta2));
    };
    const auto fd = [&](auto &adam, auto &layer) {
        adam.init(layer, static_cast<float>(config.lr_d), static_cast<float>(config.beta1),
                  static_cast<float>(config.beta2));
    };
    const auto fv = [&](auto &adam, auto &param) {
        adam.init(param, static_cast<float>(config.lr_g), static_cast<float>(config.beta1),
                  static_cast<float>(config.beta2));
    };
    fg(adam_g1, gen.l1);
    fg(adam_g2, gen.l2);
    fg(adam_g3, gen.l3);
    fv(adam_bn1g, gen.bn1.gamma);
    fv(adam_bn1b, gen.bn1.beta);
    fv(adam_bn2g, gen.bn2.gamma);
    fv(adam_bn2b, gen.bn2.beta);
    fd(adam_d1, critic.l1);
    fd(adam_d2, critic.l2);
    fd(adam_d3, critic.l3);

    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int steps_per_epoch =
        std::max<int>(1, static_cast<int>(micro_sample.size() / static_cast<std::size_t>(batch)));

    auto sample_batch_conditions = [&](std::vector<Condition> &conds, MatF &c) {
        conds.resize(batch);
        c.setZero(batch, static_cast<Eigen::Index>(cond_w));
        for (int i = 0; i < batch; ++i) {
            conds[i] = sampler.sample(rng);
            c(i, static_cast<Eigen::Index>(enc.offset[conds[i].attr] + conds[i].value)) = 1.0f;
        }
    };

    auto draw_latent = [&](MatF &z) {
        z.resize(batch, config.z_dim);
        for (Eigen::Index r = 0; r < z.rows(); ++r)
            for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = static_cast<float>(normal(rng));
    };

    // pack per-sample [row | cond] pairs into pac-sized critic groups
    auto to_groups = [&](const MatF &rows, const MatF &conds) {
        MatF groups(n_groups, static_cast<Eigen::Index>(critic_in));
        for (int g = 0; g < n_groups; ++g)
            for (int p = 0; p < pac; ++p) {
                const int b = g * pac + p;
                groups.block(g, static_cast<Eigen::Index>(p * pair_w), 1,
                             static_cast<Eigen::Index>(data_w)) = rows.row(b);
                groups.block(g, static_cast<Eigen::Index>(p * pair_w + data_w), 1,
                             static_cast<Eigen::Index>(cond_w)) = conds.row(b);
            }
        return groups;
    };

    auto check_finite = [&](double v, const char *what, int epoch) {
        if (!std::isfinite(v) || std::abs(v) > kDivergenceLimit)
            throw NumericError("train: " + std::string(what) + " diverged at epoch " +
                               std::to_string(epoch) + " (value " + std::to_string(v) + ")");
    };

    std::vector<Condition> conds;
    MatF c_mat, z_mat;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_d = 0.0, epoch_g = 0.0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            // ---- critic update ----
            sample_batch_conditions(conds, c_mat);
            draw_latent(z_mat);
            MatF in0(batch, static_cast<Eigen::Index>(in0_w));
            in0 << z_mat, c_mat;
            auto gf = gen.forward(in0, heads, static_cast<float>(config.tau), rng);

            // real rows drawn under a permutation of the same conditions
            std::vector<int> perm(batch);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            MatF real(batch, static_cast<Eigen::Index>(data_w));
            MatF c_perm(batch, static_cast<Eigen::Index>(cond_w));
            std::vector<float> row_buf(data_w);
            for (int i = 0; i < batch; ++i) {
                const Condition &cond = conds[static_cast<std::size_t>(perm[i])];
                const std::size_t ridx = sampler.sample_row_for(cond, rng);
                enc.encode_row(micro_sample.row(ridx), row_buf.data());
                for (std::size_t k = 0; k < data_w; ++k) real(i, static_cast<Eigen::Index>(k)) = row_buf[k];
                c_perm.row(i) = c_mat.row(perm[i]);
            }

            MatF fake_groups = to_groups(gf.soft, c_mat);
            MatF real_groups = to_groups(real, c_perm);

            auto f_fake = critic.forward(fake_groups, true, &rng);
            auto f_real = critic.forward(real_groups, true, &rng);
            const double mean_fake = f_fake.y.mean();
            const double mean_real = f_real.y.mean();

            MatF interp(n_groups, static_cast<Eigen::Index>(critic_in));
            for (int g = 0; g < n_groups; ++g) {
                const float alpha = static_cast<float>(unit(rng));
                interp.row(g) = alpha * real_groups.row(g) + (1.0f - alpha) * fake_groups.row(g);
            }
            auto f_interp = critic.forward(interp, true, &rng);

            nn::Critic<float>::Grads gd;
            gd.zero_like(critic);
            const float gp =
                critic.gradient_penalty(f_interp, static_cast<float>(config.gp_lambda), gd);
            VecF dy_fake = VecF::Constant(n_groups, 1.0f / static_cast<float>(n_groups));
            VecF dy_real = VecF::Constant(n_groups, -1.0f / static_cast<float>(n_groups));
            critic.backward(f_fake, dy_fake, gd, nullptr);
            critic.backward(f_real, dy_real, gd, nullptr);

            const double loss_d = mean_fake - mean_real + gp;
            check_finite(loss_d, "critic loss", epoch);
            adam_d1.update(critic.l1, gd.g1);
            adam_d2.update(critic.l2, gd.g2);
            adam_d3.update(critic.l3, gd.g3);

            // ---- generator update ----
            sample_batch_conditions(conds, c_mat);
            draw_latent(z_mat);
            in0 << z_mat, c_mat;
            auto gf2 = gen.forward(in0, heads, static_cast<float>(config.tau), rng);
            MatF fake2 = to_groups(gf2.soft, c_mat);
            auto f2 = critic.forward(fake2, true, &rng);
            const double loss_adv = -f2.y.mean();

            nn::Critic<float>::Grads scratch;
            scratch.zero_like(critic);
            MatF dgroups;
            VecF dy_gen = VecF::Constant(n_groups, -1.0f / static_cast<float>(n_groups));
            critic.backward(f2, dy_gen, scratch, &dgroups);

            // ungroup: keep the data block of each sample
            MatF dsoft(batch, static_cast<Eigen::Index>(data_w));
            for (int g = 0; g < n_groups; ++g)
                for (int p = 0; p < pac; ++p)
                    dsoft.row(g * pac + p) =
                        dgroups.block(g, static_cast<Eigen::Index>(p * pair_w), 1,
                                      static_cast<Eigen::Index>(data_w));

            // conditioning loss: cross entropy of the conditioned head's raw
            // logits against the requested value
            MatF dlogits_ce = MatF::Zero(batch, static_cast<Eigen::Index>(data_w));
            double loss_ce = 0.0;
            for (int i = 0; i < batch; ++i) {
                const Condition &cond = conds[static_cast<std::size_t>(i)];
                const std::size_t off = enc.offset[cond.attr];
                const std::size_t cardn = model.schema->cardinality(cond.attr);
                double maxv = -std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < cardn; ++k)
                    maxv = std::max(maxv,
                                    static_cast<double>(gf2.logits(i, static_cast<Eigen::Index>(off + k))));
                double denom = 0.0;
                for (std::size_t k = 0; k < cardn; ++k)
                    denom += std::exp(
                        static_cast<double>(gf2.logits(i, static_cast<Eigen::Index>(off + k))) - maxv);
                for (std::size_t k = 0; k < cardn; ++k) {
                    const double p =
                        std::exp(static_cast<double>(gf2.logits(i, static_cast<Eigen::Index>(off + k))) -
                                 maxv) /
                        denom;
                    const double target = (k == cond.value) ? 1.0 : 0.0;
                    dlogits_ce(i, static_cast<Eigen::Index>(off + k)) =
                        static_cast<float>((p - target) / batch);
                    if (k == cond.value) loss_ce += -std::log(std::max(p, 1e-30)) / batch;
                }
            }

            nn::Generator<float>::Grads gg;
            gg.zero_like(gen);
            gen.backward(gf2, dsoft, dlogits_ce, heads, static_cast<float>(config.tau), gg);
            const double loss_g = loss_adv + loss_ce;
            check_finite(loss_g, "generator loss", epoch);
            adam_g1.update(gen.l1, gg.g1);
            adam_g2.update(gen.l2, gg.g2);
            adam_g3.update(gen.l3, gg.g3);
            adam_bn1g.update(gen.bn1.gamma, gg.dgamma1);
            adam_bn1b.update(gen.bn1.beta, gg.dbeta1);
            adam_bn2g.update(gen.bn2.gamma, gg.dgamma2);
            adam_bn2b.update(gen.bn2.beta, gg.dbeta2);

            epoch_d += loss_d;
            epoch_g += loss_g;
        }
        model.loss_trace.emplace_back(static_cast<float>(epoch_g / steps_per_epoch),
                                      static_cast<float>(epoch_d / steps_per_epoch));
        if ((epoch + 1) % 50 == 0 || epoch == config.epochs - 1)
            logging::info("ctgan: epoch " + std::to_string(epoch + 1) + "/" +
                          std::to_string(config.epochs) +
                          " g=" + std::to_string(model.loss_trace.back().first) +
                          " d=" + std::to_string(model.loss_trace.back().second));
    }

    model.net = std::move(gen);
    return model;
}

// --- generation -----------------------------------------------------------------

namespace {

std::optional<Condition> resolve_condition(
    const TrainedGenerator &model,
    const std::optional<std::pair<std::string, std::string>> &condition) {
    if (!condition) return std::nullopt;
    const Schema &schema = *model.schema;
    Condition c;
    c.attr = schema.index_of(condition->first);
    auto code = schema.code_of(c.attr, condition->second);
    if (!code)
        throw DataError("generate: unknown category '" + condition->second + "' for attribute '" +
                        condition->first + "'");
    c.value = *code;
    return c;
}

Population generate_impl(const TrainedGenerator &model, std::size_t n,
                         const std::optional<Condition> &cond, std::uint64_t seed,
                         std::int64_t max_attempts, bool filter) {
    if (model.schema_fingerprint != model.schema->fingerprint())
        throw DataError("generate: model fingerprint does not match its schema");
    const Encoding &enc = model.encoding;
    const Schema &schema = *model.schema;
    const auto heads = enc.heads();

    std::vector<Population::Row> rows;
    rows.reserve(n);
    if (n == 0) return Population(model.schema, std::move(rows), Provenance::synthetic);

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t cond_w = enc.width;
    const std::size_t in0_w = static_cast<std::size_t>(model.config.z_dim) + cond_w;
    const int batch = std::max(1, std::min<int>(model.config.batch_size, 512));

    // raw-frequency condition source for unconditional draws
    std::vector<std::vector<double>> raw_cdf(model.category_counts.size());
    for (std::size_t a = 0; a < model.category_counts.size(); ++a) {
        double acc = 0.0;
        for (auto cnt : model.category_counts[a]) {
            acc += static_cast<double>(cnt);
            raw_cdf[a].push_back(acc);
        }
    }

    std::int64_t budget = max_attempts > 0 ? max_attempts : static_cast<std::int64_t>(n) * 1000;
    std::vector<float> row_buf(enc.width);

    while (rows.size() < n) {
        if (filter && budget <= 0) {
            std::ostringstream msg;
            msg << "generate: budget exhausted with " << rows.size() << "/" << n << " rows";
            if (cond)
                msg << " for condition " << schema.attribute(cond->attr).name << "="
                    << schema.label_of(cond->attr, cond->value);
            throw BudgetError(msg.str());
        }
        const int want = static_cast<int>(std::min<std::size_t>(n - rows.size(),
                                                                static_cast<std::size_t>(batch)));
        const int chunk = std::max(want, 1);

        MatF in0(chunk, static_cast<Eigen::Index>(in0_w));
        for (int i = 0; i < chunk; ++i) {
            for (int zc = 0; zc < model.config.z_dim; ++zc)
                in0(i, zc) = static_cast<float>(normal(rng));
            Condition c;
            if (cond) {
                c = *cond;
            } else {
                std::uniform_int_distribution<std::size_t> pick_attr(0, raw_cdf.size() - 1);
                c.attr = pick_attr(rng);
                std::size_t idx = 0;
                discrete_draw(raw_cdf[c.attr], rng, idx);
                c.value = static_cast<std::uint16_t>(idx);
            }
            fill_condition(enc, c, row_buf.data());
            for (std::size_t k = 0; k < cond_w; ++k)
                in0(i, static_cast<Eigen::Index>(model.config.z_dim + k)) = row_buf[k];
        }

        nn::Generator<float>::Forward fwd;
        model.net.eval_logits(in0, fwd);

        // categorical sample per head: argmax of gumbel-perturbed logits
        for (int i = 0; i < chunk && rows.size() < n; ++i) {
            Population::Row row(schema.attribute_count());
            for (std::size_t a = 0; a < heads.size(); ++a) {
                const auto [off, width] = heads[a];
                std::size_t best = 0;
                double best_v = -std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < width; ++k) {
                    const double draw = std::max(unit(rng), 1e-300);
                    const double g = -std::log(std::max(-std::log(draw), 1e-300));
                    const double v =
                        static_cast<double>(fwd.logits(i, static_cast<Eigen::Index>(off + k))) + g;
                    if (v > best_v) {
                        best_v = v;
                        best = k;
                    }
                }
                row[a] = static_cast<std::uint16_t>(best);
            }
            --budget;
            if (filter && cond && row[cond->attr] != cond->value) continue;
            rows.push_back(std::move(row));
        }
    }
    return Population(model.schema, std::move(rows), Provenance::synthetic);
}

} // namespace

Population generate(const TrainedGenerator &model, std::size_t n,
                    const std::optional<std::pair<std::string, std::string>> &condition,
                    std::uint64_t seed, std::int64_t max_attempts) {
    return generate_impl(model, n, resolve_condition(model, condition), seed, max_attempts, true);
}

Population generate_unfiltered(const TrainedGenerator &model, std::size_t n,
                               const std::pair<std::string, std::string> &condition,
                               std::uint64_t seed) {
    return generate_impl(model, n, resolve_condition(model, condition), seed, 0, false);
}

// --- checkpoint IO -----------------------------------------------------------------

void TrainedGenerator::save(const std::string &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot write '" + path + "'");
    out.write(kMagic, 4);
    write_le<std::uint8_t>(out, kVersion);

    const std::string schema_json = schema_to_json(*schema);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(schema_json.size()));
    out.write(schema_json.data(), static_cast<std::streamsize>(schema_json.size()));
    write_le<std::uint64_t>(out, schema_fingerprint);

    write_le<std::int32_t>(out, config.epochs);
    write_le<std::int32_t>(out, config.batch_size);
    write_le<std::int32_t>(out, config.z_dim);
    write_le<std::int32_t>(out, config.hidden);
    write_le<double>(out, config.tau);
    write_le<std::int32_t>(out, config.pac_size);
    write_le<double>(out, config.gp_lambda);
    write_le<double>(out, config.lr_g);
    write_le<double>(out, config.lr_d);
    write_le<double>(out, config.beta1);
    write_le<double>(out, config.beta2);
    write_le<std::uint64_t>(out, config.seed);

    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(category_counts.size()));
    for (const auto &attr_counts : category_counts) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(attr_counts.size()));
        for (auto c : attr_counts) write_le<std::int64_t>(out, c);
    }

    write_matrix(out, net.l1.weight);
    write_matrix(out, MatF(net.l1.bias));
    write_matrix(out, net.l2.weight);
    write_matrix(out, MatF(net.l2.bias));
    write_matrix(out, net.l3.weight);
    write_matrix(out, MatF(net.l3.bias));
    for (const auto *bn : {&net.bn1, &net.bn2}) {
        write_matrix(out, MatF(bn->gamma));
        write_matrix(out, MatF(bn->beta));
        write_matrix(out, MatF(bn->running_mean));
        write_matrix(out, MatF(bn->running_var));
    }

    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(loss_trace.size()));
    for (const auto &[g, d] : loss_trace) {
        write_le<float>(out, g);
        write_le<float>(out, d);
    }
    if (!out) throw IoError("checkpoint: write failed for '" + path + "'");
}

TrainedGenerator TrainedGenerator::load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("checkpoint: bad magic in '" + path + "'");
    const auto version = read_le<std::uint8_t>(in);
    if (version != kVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version));

    TrainedGenerator model;
    const auto schema_len = read_le<std::uint32_t>(in);
    std::string schema_json(schema_len, '\0');
    in.read(schema_json.data(), schema_len);
    if (!in) throw IoError("checkpoint: truncated schema block");
    model.schema = parse_schema_json(schema_json);
    model.schema_fingerprint = read_le<std::uint64_t>(in);
    if (model.schema_fingerprint != model.schema->fingerprint())
        throw DataError("checkpoint: schema fingerprint mismatch");
    model.encoding = Encoding::from_schema(model.schema);

    model.config.epochs = read_le<std::int32_t>(in);
    model.config.batch_size = read_le<std::int32_t>(in);
    model.config.z_dim = read_le<std::int32_t>(in);
    model.config.hidden = read_le<std::int32_t>(in);
    model.config.tau = read_le<double>(in);
    model.config.pac_size = read_le<std::int32_t>(in);
    model.config.gp_lambda = read_le<double>(in);
    model.config.lr_g = read_le<double>(in);
    model.config.lr_d = read_le<double>(in);
    model.config.beta1 = read_le<double>(in);
    model.config.beta2 = read_le<double>(in);
    model.config.seed = read_le<std::uint64_t>(in);

    const auto n_attrs = read_le<std::uint32_t>(in);
    model.category_counts.resize(n_attrs);
    for (auto &attr_counts : model.category_counts) {
        const auto card = read_le<std::uint32_t>(in);
        attr_counts.resize(card);
        for (auto &c : attr_counts) c = read_le<std::int64_t>(in);
    }

    model.net.l1.weight = read_matrix(in);
    model.net.l1.bias = read_matrix(in).row(0);
    model.net.l2.weight = read_matrix(in);
    model.net.l2.bias = read_matrix(in).row(0);
    model.net.l3.weight = read_matrix(in);
    model.net.l3.bias = read_matrix(in).row(0);
    for (auto *bn : {&model.net.bn1, &model.net.bn2}) {
        bn->gamma = read_matrix(in).row(0);
        bn->beta = read_matrix(in).row(0);
        bn->running_mean = read_matrix(in).row(0);
        bn->running_var = read_matrix(in).row(0);
    }

    const auto n_epochs = read_le<std::uint32_t>(in);
    model.loss_trace.resize(n_epochs);
    for (auto &[g, d] : model.loss_trace) {
        g = read_le<float>(in);
        d = read_le<float>(in);
    }
    return model;
}

void TrainedGenerator::write_loss_csv(std::ostream &out) const {
    out << "epoch,g_loss,d_loss\n";
    for (std::size_t e = 0; e < loss_trace.size(); ++e)
        out << e + 1 << ',' << loss_trace[e].first << ',' << loss_trace[e].second << '\n';
}

} // namespace popsynth
