#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace perish {

struct NGramConfig {
    int order = 4;
    int vocab_min_count = 2;
    // Add-delta smoothing of the unigram component; keeps every probability
    // nonzero so cross-entropy is always finite.
    double unigram_delta = 0.5;
    int em_max_iterations = 500;
    double em_tolerance = 1e-9;

    nlohmann::json to_json() const;
    static NGramConfig from_json(const nlohmann::json& j);
};

struct LossEstimate {
    double loss = 0.0;  // nats per token
    std::size_t token_count = 0;
};

// Interpolated n-gram language model:
//
//   p(w | h) = sum_k weights[k] * P_k(w | h_k),   k = 0 .. order-1
//
// P_0 is the add-delta unigram over the vocabulary (with <unk>); P_k for k >= 1
// is the maximum-likelihood estimate given the k preceding tokens, or P_{k-1}
// when that context was never seen. The weights lie on the simplex and are
// fitted by EM to maximize dev-set likelihood, which is the same as
// minimizing dev cross-entropy.
class NGramModel {
public:
    static NGramModel train(std::span<const std::string> subset, std::span<const std::string> dev,
                            const NGramConfig& cfg);

    LossEstimate cross_entropy(std::span<const std::string> test) const;

    const std::vector<double>& weights() const { return weights_; }
    std::size_t vocab_size() const { return vocab_.size(); }
    int order() const { return order_; }
    int em_iterations() const { return em_iterations_; }
    double dev_loss() const { return dev_loss_; }

private:
    static constexpr std::uint32_t kUnk = 0;
    static constexpr std::uint32_t kNoContext = 0xFFFFFFFFu;

    std::vector<std::uint32_t> encode(std::span<const std::string> tokens) const;
    // Component probabilities P_0..P_{order-1} for position i of ids.
    void components(std::span<const std::uint32_t> ids, std::size_t i, std::span<double> out) const;
    std::uint32_t find_context(std::uint32_t parent, std::uint32_t token) const;

    int order_ = 1;
    double delta_ = 0.5;
    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::vector<std::uint64_t> unigram_;
    std::uint64_t total_ = 0;
    // Context of length k is identified by extending a length-(k-1) context id
    // with the token k places back. Root parent is kNoContext.
    std::unordered_map<std::uint64_t, std::uint32_t> context_ids_;
    std::vector<std::uint64_t> context_counts_;
    std::unordered_map<std::uint64_t, std::uint32_t> ngram_counts_;  // (context id, word)
    std::vector<double> weights_;
    int em_iterations_ = 0;
    double dev_loss_ = 0.0;
};

}  // namespace perish
