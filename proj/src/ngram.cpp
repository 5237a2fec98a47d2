#include "perish/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "perish/error.hpp"

namespace perish {
namespace {

std::uint64_t pack(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace

nlohmann::json NGramConfig::to_json() const {
    return {{"order", order},
            {"vocab_min_count", vocab_min_count},
            {"unigram_delta", unigram_delta},
            {"em_max_iterations", em_max_iterations},
            {"em_tolerance", em_tolerance},
            {"weight_tuning", "em"}};
}

NGramConfig NGramConfig::from_json(const nlohmann::json& j) {
    NGramConfig cfg;
    cfg.order = j.value("order", cfg.order);
    cfg.vocab_min_count = j.value("vocab_min_count", cfg.vocab_min_count);
    cfg.unigram_delta = j.value("unigram_delta", cfg.unigram_delta);
    cfg.em_max_iterations = j.value("em_max_iterations", cfg.em_max_iterations);
    cfg.em_tolerance = j.value("em_tolerance", cfg.em_tolerance);
    return cfg;
}

NGramModel NGramModel::train(std::span<const std::string> subset, std::span<const std::string> dev,
                             const NGramConfig& cfg) {
    if (subset.empty()) throw DataError("n-gram training subset is empty");
    if (cfg.order < 1) throw DataError("n-gram order must be >= 1");
    if (cfg.unigram_delta <= 0.0) throw DataError("unigram_delta must be positive");

    NGramModel m;
    m.order_ = cfg.order;
    m.delta_ = cfg.unigram_delta;

    std::unordered_map<std::string, std::uint64_t> raw;
    for (const auto& t : subset) ++raw[t];
    m.vocab_.emplace("<unk>", kUnk);
    // Deterministic id assignment: first occurrence order.
    for (const auto& t : subset) {
        if (raw[t] >= static_cast<std::uint64_t>(cfg.vocab_min_count)) {
            m.vocab_.try_emplace(t, static_cast<std::uint32_t>(m.vocab_.size()));
        }
    }
    const auto ids = m.encode(subset);

    m.unigram_.assign(m.vocab_.size(), 0);
    for (auto id : ids) ++m.unigram_[id];
    m.total_ = ids.size();

    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::uint32_t ctx = kNoContext;
        for (int k = 1; k < m.order_ && static_cast<std::size_t>(k) <= i; ++k) {
            const auto key = pack(ctx, ids[i - k]);
            auto [it, inserted] = m.context_ids_.try_emplace(key, static_cast<std::uint32_t>(m.context_counts_.size()));
            if (inserted) m.context_counts_.push_back(0);
            ctx = it->second;
            ++m.context_counts_[ctx];
            ++m.ngram_counts_[pack(ctx, ids[i])];
        }
    }

    // EM over mixture weights on dev.
    const auto k = static_cast<std::size_t>(m.order_);
    m.weights_.assign(k, 1.0 / static_cast<double>(k));
    const auto dev_ids = m.encode(dev);
    if (dev_ids.empty() || k == 1) {
        if (!dev_ids.empty()) m.dev_loss_ = m.cross_entropy(dev).loss;
        return m;
    }
    std::vector<double> comp(dev_ids.size() * k);
    for (std::size_t i = 0; i < dev_ids.size(); ++i) {
        m.components(dev_ids, i, std::span<double>(comp).subspan(i * k, k));
    }
    std::vector<double> next(k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < cfg.em_max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        double ll = 0.0;
        for (std::size_t i = 0; i < dev_ids.size(); ++i) {
            const double* p = &comp[i * k];
            double mix = 0.0;
            for (std::size_t j = 0; j < k; ++j) mix += m.weights_[j] * p[j];
            ll += std::log(mix);
            for (std::size_t j = 0; j < k; ++j) next[j] += m.weights_[j] * p[j] / mix;
        }
        const double n = static_cast<double>(dev_ids.size());
        for (std::size_t j = 0; j < k; ++j) m.weights_[j] = next[j] / n;
        m.em_iterations_ = iter + 1;
        if (std::abs(ll - prev_ll) <= cfg.em_tolerance * n) break;
        prev_ll = ll;
    }
    const double s = std::accumulate(m.weights_.begin(), m.weights_.end(), 0.0);
    for (auto& w : m.weights_) w /= s;
    m.dev_loss_ = m.cross_entropy(dev).loss;
    return m;
}

std::vector<std::uint32_t> NGramModel::encode(std::span<const std::string> tokens) const {
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto it = vocab_.find(t);
        ids.push_back(it == vocab_.end() ? kUnk : it->second);
    }
    return ids;
}

std::uint32_t NGramModel::find_context(std::uint32_t parent, std::uint32_t token) const {
    auto it = context_ids_.find(pack(parent, token));
    return it == context_ids_.end() ? kNoContext : it->second;
}

void NGramModel::components(std::span<const std::uint32_t> ids, std::size_t i, std::span<double> out) const {
    const auto w = ids[i];
    const double v = static_cast<double>(vocab_.size());
    out[0] = (static_cast<double>(unigram_[w]) + delta_) / (static_cast<double>(total_) + delta_ * v);
    std::uint32_t ctx = kNoContext;
    bool seen = true;
    for (int k = 1; k < order_; ++k) {
        if (seen && static_cast<std::size_t>(k) <= i) {
            ctx = find_context(ctx, ids[i - k]);
            seen = ctx != kNoContext;
        } else {
            seen = false;
        }
        if (!seen) {
            out[k] = out[k - 1];
            continue;
        }
        auto it = ngram_counts_.find(pack(ctx, w));
        const double c = it == ngram_counts_.end() ? 0.0 : static_cast<double>(it->second);
        out[k] = c / static_cast<double>(context_counts_[ctx]);
    }
}

LossEstimate NGramModel::cross_entropy(std::span<const std::string> test) const {
    if (test.empty()) throw DataError("cross-entropy test sequence is empty");
    const auto ids = encode(test);
    std::vector<double> comp(static_cast<std::size_t>(order_));
    double nll = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        components(ids, i, comp);
        double p = 0.0;
        for (std::size_t j = 0; j < comp.size(); ++j) p += weights_[j] * comp[j];
        nll -= std::log(p);
    }
    LossEstimate est;
    est.token_count = ids.size();
    est.loss = std::max(0.0, nll / static_cast<double>(ids.size()));
    return est;
}

}  // namespace perish
