#include "perish/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "perish/error.hpp"

namespace perish::synth {

void validate_stochastic(const Matrix& m) {
    if (m.empty()) throw DataError("transition matrix is empty");
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != m.size()) throw DataError("transition matrix is not square");
        double s = 0.0;
        for (double v : m[i]) {
            if (!(v >= 0.0)) throw DataError("negative transition probability in row " + std::to_string(i));
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-9) throw DataError("row " + std::to_string(i) + " does not sum to 1");
    }
}

std::vector<double> stationary_distribution(const Matrix& p) {
    validate_stochastic(p);
    const std::size_t n = p.size();
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);
    constexpr int kMaxIterations = 1'000'000;
    for (int it = 0; it < kMaxIterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double half = 0.5 * pi[i];
            next[i] += half;
            if (half == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) next[j] += half * p[i][j];
        }
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= total;
            diff += std::abs(next[i] - pi[i]);
        }
        pi.swap(next);
        if (diff < 1e-12) break;
    }
    return pi;
}

bool is_irreducible(const Matrix& p) {
    const std::size_t n = p.size();
    auto reaches_all = [&](bool reverse) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                const double v = reverse ? p[j][i] : p[i][j];
                if (v > 0.0 && !seen[j]) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return n > 0 && reaches_all(false) && reaches_all(true);
}

double entropy_rate(const Matrix& p, std::vector<std::string>* warnings) {
    const auto pi = stationary_distribution(p);
    if (warnings && !is_irreducible(p)) {
        warnings->push_back("chain is reducible; entropy rate taken over its recurrent classes");
    }
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double row = 0.0;
        for (double v : p[i]) {
            if (v > 0.0) row -= v * std::log(v);
        }
        h += pi[i] * row;
    }
    return h;
}

// ---------------------------------------------------------------------------

double DriftProcess::weight(double s) const {
    if (fixed_weight) return *fixed_weight;
    return -std::expm1(-rho * s);
}

Matrix DriftProcess::matrix_at(double s) const {
    const double w = weight(s);
    Matrix m = p_base;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) m[i][j] = (1.0 - w) * p_base[i][j] + w * p_alt[i][j];
    }
    return m;
}

namespace {

Matrix sparse_random(std::size_t v, std::size_t k, double exponent, Rng& rng) {
    k = std::min(k, v);
    std::vector<double> weights(k);
    for (std::size_t r = 0; r < k; ++r) weights[r] = std::pow(static_cast<double>(r + 1), -exponent);
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> states(v);
    std::iota(states.begin(), states.end(), 0);
    Matrix m(v, std::vector<double>(v, 0.0));
    for (std::size_t i = 0; i < v; ++i) {
        // partial Fisher-Yates: the first k entries become a random k-subset
        for (std::size_t r = 0; r < k; ++r) {
            const auto j = r + static_cast<std::size_t>(rng.below(v - r));
            std::swap(states[r], states[j]);
            m[i][states[r]] = weights[r] / total;
        }
    }
    return m;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

DriftProcess make_process(const ProcessSpec& spec) {
    if (spec.vocab_size < 2) throw DataError("vocabulary needs at least 2 states");
    if (spec.successors < 1) throw DataError("each state needs at least one successor");
    if (!(spec.rho >= 0.0)) throw DataError("drift speed rho must be >= 0");
    Rng base_rng(mix_seed(spec.seed, 0));
    Rng alt_rng(mix_seed(spec.seed, 1));
    DriftProcess p;
    p.p_base = sparse_random(spec.vocab_size, spec.successors, spec.zipf_exponent, base_rng);
    p.p_alt = sparse_random(spec.vocab_size, spec.successors, spec.zipf_exponent, alt_rng);
    p.rho = spec.rho;
    p.seed = spec.seed;
    return p;
}

ChainSampler::ChainSampler(const DriftProcess& process, double s)
    : base_(compile(process.p_base)), alt_(compile(process.p_alt)), w_(process.weight(s)) {
    if (base_.size() != alt_.size()) throw DataError("base and alternate matrices differ in size");
    if (!(w_ >= 0.0 && w_ <= 1.0)) throw DataError("mixing weight outside [0, 1]");
}

std::vector<ChainSampler::Row> ChainSampler::compile(const Matrix& m) {
    validate_stochastic(m);
    std::vector<Row> rows(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            if (m[i][j] > 0.0) {
                acc += m[i][j];
                rows[i].index.push_back(j);
                rows[i].cumulative.push_back(acc);
            }
        }
    }
    return rows;
}

std::size_t ChainSampler::draw(const Row& row, double u) {
    const double target = u * row.cumulative.back();
    const auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), target);
    const auto k = std::min<std::size_t>(it - row.cumulative.begin(), row.index.size() - 1);
    return row.index[k];
}

std::size_t ChainSampler::next(std::size_t state, Rng& rng) const {
    const bool alt = w_ >= 1.0 || (w_ > 0.0 && rng.uniform() < w_);
    return draw(alt ? alt_[state] : base_[state], rng.uniform());
}

std::string token_name(std::size_t index, std::size_t vocab_size) {
    std::size_t width = 3;
    for (std::size_t v = vocab_size > 0 ? vocab_size - 1 : 0; v >= 1000; v /= 10) ++width;
    std::string digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "w" + digits;
}

namespace {

constexpr int kBurnIn = 200;

std::size_t burn_in(const ChainSampler& sampler, Rng& rng) {
    std::size_t state = static_cast<std::size_t>(rng.below(sampler.vocab_size()));
    for (int i = 0; i < kBurnIn; ++i) state = sampler.next(state, rng);
    return state;
}

}  // namespace

TokenSeq sample_tokens(const DriftProcess& process, double s, std::size_t count, std::uint64_t seed) {
    const ChainSampler sampler(process, s);
    Rng rng(mix_seed(seed, 7));
    std::size_t state = burn_in(sampler, rng);
    TokenSeq out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        state = sampler.next(state, rng);
        out.push_back(token_name(state, sampler.vocab_size()));
    }
    return out;
}

std::vector<PeriodId> monthly_periods(const PeriodId& first, int count) {
    if (first.month == 0) throw DataError("monthly periods need a month, got " + first.to_string());
    std::vector<PeriodId> out;
    for (int k = 0; k < count; ++k) out.push_back(first.plus_months(k));
    return out;
}

std::vector<Document> generate_corpus(const DriftProcess& process, const CorpusSpec& spec) {
    if (spec.periods.empty()) return {};
    if (spec.title_min < 1 || spec.title_max < spec.title_min || spec.comment_min < 1 ||
        spec.comment_max < spec.comment_min || spec.max_comments < 0 || spec.score_max < spec.score_min) {
        throw DataError("inconsistent synthetic corpus shape");
    }
    std::vector<Document> docs;
    const PeriodId first = spec.periods.front();
    for (std::size_t k = 0; k < spec.periods.size(); ++k) {
        const PeriodId& period = spec.periods[k];
        const double s = first.months_until(period) / 12.0;
        const ChainSampler sampler(process, s);
        Rng rng(mix_seed(process.seed, 1000 + static_cast<std::uint64_t>(first.months_until(period))));
        std::size_t state = burn_in(sampler, rng);
        const std::int64_t t0 = period.start_timestamp();
        const std::int64_t span = period.end_timestamp() - t0;

        std::size_t remaining = spec.words_per_period;
        auto text = [&](std::size_t lo, std::size_t hi) {
            std::size_t len = std::min<std::size_t>(remaining, lo + rng.below(hi - lo + 1));
            remaining -= len;
            std::string out;
            for (std::size_t i = 0; i < len; ++i) {
                state = sampler.next(state, rng);
                if (i) out += ' ';
                out += token_name(state, sampler.vocab_size());
            }
            return out;
        };
        char ym[16];
        std::snprintf(ym, sizeof ym, "%04d%02d", period.year, period.month);
        for (std::size_t post = 0; remaining > 0; ++post) {
            Document d;
            d.topic = spec.topic;
            d.timestamp = t0 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
            d.kind = DocKind::kPost;
            d.score = static_cast<int>(rng.range(spec.score_min, spec.score_max));
            d.id = spec.topic + "-" + ym + "-" + std::to_string(post);
            d.text = text(spec.title_min, spec.title_max);
            const auto comments = static_cast<int>(rng.range(0, spec.max_comments));
            const std::string post_id = d.id;
            const std::int64_t ts = d.timestamp;
            docs.push_back(std::move(d));
            for (int c = 0; c < comments && remaining > 0; ++c) {
                Document cd;
                cd.topic = spec.topic;
                cd.timestamp = ts;
                cd.kind = DocKind::kComment;
                cd.score = static_cast<int>(rng.range(spec.score_min, spec.score_max));
                cd.id = post_id + "#c" + std::to_string(c);
                cd.parent_id = post_id;
                cd.text = text(spec.comment_min, spec.comment_max);
                docs.push_back(std::move(cd));
            }
        }
    }
    return docs;
}

}  // namespace perish::synth
