#pragma once

#include <cstdint>
#include <string>

#include "specstream/moments.hpp"
#include "specstream/params.hpp"
#include "specstream/rng.hpp"

namespace specstream {

enum class StreamKind { stochastic, nonstochastic, oracle, corpus };
enum class TriplePolicy { first3, rand3 };

// Stream description shared by the generators and the experiment runner.
// For synthetic kinds the word distribution given topic j is p on word j
// and (1-p)/(d-1) elsewhere, which requires k <= d and p in (1/d, 1].
struct StreamConfig {
    StreamKind kind = StreamKind::stochastic;
    std::size_t k = 0;
    std::size_t d = 0;
    std::uint64_t n = 0;
    double p = 0.0;
    Vector prior;                       // stochastic / oracle
    std::vector<std::size_t> schedule;  // nonstochastic / oracle: per-batch topic counts
    std::string corpus_path;
    TriplePolicy policy = TriplePolicy::first3;
    std::uint64_t seed = 0;

    void validate() const;
    bool synthetic() const { return kind != StreamKind::corpus; }

    Matrix word_matrix() const;        // d x k topic-word columns
    ExactModel exact_model() const;    // synthetic kinds only
};

struct LabeledTriple {
    OneHotTriple x;
    std::size_t topic;
};

// Seed-deterministic synthetic stream. Topics come from the prior
// (stochastic) or the repeating schedule (non-stochastic); the three words
// are conditionally i.i.d. given the topic. prior_at exposes the exact
// per-step topic distribution for noise-free (oracle) evaluation.
class SyntheticStream {
public:
    explicit SyntheticStream(const StreamConfig& cfg);

    LabeledTriple next();
    Vector prior_at(std::uint64_t t) const;  // 1-based
    std::uint64_t position() const { return t_; }

private:
    std::size_t scheduled_topic(std::uint64_t t) const;

    StreamConfig cfg_;
    bool scheduled_;
    std::size_t batch_len_ = 0;
    Xoshiro256pp rng_;
    std::uint64_t t_ = 0;
};

struct CorpusData {
    std::vector<OneHotTriple> triples;
    std::vector<std::string> vocab;        // index -> token, frequency order
    std::vector<std::uint64_t> vocab_counts;
    std::size_t docs_total = 0;
    std::size_t docs_skipped = 0;  // fewer than 3 in-vocabulary tokens
};

// Two-pass ingestion of a one-document-per-line, whitespace-tokenized text
// file. Pass one builds the top-d frequency vocabulary (ties broken
// lexicographically); pass two reduces each document to a word triple:
// FIRST3 takes the first three in-vocabulary tokens, RAND3 samples three
// distinct in-vocabulary token positions (seeded) and keeps document order.
CorpusData load_corpus(const std::string& path, std::size_t d, TriplePolicy policy,
                       std::uint64_t seed);

// One line per word: "index<TAB>token<TAB>count".
void write_vocab_manifest(const std::string& path, const CorpusData& corpus);

}  // namespace specstream
