#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perish/corpus.hpp"
#include "perish/rng.hpp"

namespace perish::synth {

// Dense row-stochastic matrix, row i = distribution of the next state.
using Matrix = std::vector<std::vector<double>>;

// Throws DataError unless every row is non-negative and sums to 1 (1e-9).
void validate_stochastic(const Matrix& m);

// Stationary distribution of the lazy chain (I + P) / 2 by power iteration
// from the uniform vector, to 1e-12 in L1. For a reducible chain this is one
// stationary distribution supported on the recurrent classes.
std::vector<double> stationary_distribution(const Matrix& p);

// Strongly connected transition graph.
bool is_irreducible(const Matrix& p);

// H = -sum_i pi_i sum_j P_ij ln P_ij, nats per token. A reducible chain adds a
// warning and uses the stationary vector above.
double entropy_rate(const Matrix& p, std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------

// P(s) = (1 - w(s)) P_base + w(s) P_alt, with w(s) = 1 - exp(-rho s) for s in
// years since the first period, or a fixed weight when one is given.
struct DriftProcess {
    Matrix p_base;
    Matrix p_alt;
    double rho = 0.0;  // per year
    std::optional<double> fixed_weight;
    std::uint64_t seed = 0;

    std::size_t vocab_size() const { return p_base.size(); }
    double weight(double s) const;
    Matrix matrix_at(double s) const;
};

struct ProcessSpec {
    std::size_t vocab_size = 1000;
    std::size_t successors = 1000;  // nonzero entries per row
    double zipf_exponent = 1.4;     // successor weights ~ 1 / rank^exponent
    double rho = 0.0;
    std::uint64_t seed = 0;
};

// Random base and alternate matrices: each row puts Zipf weights on a random
// subset of `successors` states, drawn independently for the two matrices.
DriftProcess make_process(const ProcessSpec& spec);

// Sampler for the mixture: each step picks base (1 - w) or alt (w), then a
// successor from that row.
class ChainSampler {
public:
    ChainSampler(const DriftProcess& process, double s);

    std::size_t next(std::size_t state, Rng& rng) const;
    std::size_t vocab_size() const { return base_.size(); }

private:
    struct Row {
        std::vector<std::size_t> index;
        std::vector<double> cumulative;
    };
    static std::vector<Row> compile(const Matrix& m);
    static std::size_t draw(const Row& row, double u);

    std::vector<Row> base_;
    std::vector<Row> alt_;
    double w_;
};

// "w017": fixed-width pseudo-words, at least three digits.
std::string token_name(std::size_t index, std::size_t vocab_size);

// `count` consecutive tokens from P(s), starting from a stationary-ish state.
TokenSeq sample_tokens(const DriftProcess& process, double s, std::size_t count, std::uint64_t seed);

struct CorpusSpec {
    std::string topic = "synthetic";
    std::vector<PeriodId> periods;  // monthly; s = months since periods.front() / 12
    std::size_t words_per_period = 200'000;
    std::size_t title_min = 6;
    std::size_t title_max = 16;
    std::size_t comment_min = 8;
    std::size_t comment_max = 40;
    int max_comments = 5;
    int score_min = 2;
    int score_max = 50;
};

// Posts with 0..max_comments comments, each a stretch of one Markov chain run
// per period. Every period gets exactly words_per_period words, timestamps
// fall inside the period, and output is deterministic under process.seed.
std::vector<Document> generate_corpus(const DriftProcess& process, const CorpusSpec& spec);

// `count` consecutive months starting at `first`.
std::vector<PeriodId> monthly_periods(const PeriodId& first, int count);

}  // namespace perish::synth
