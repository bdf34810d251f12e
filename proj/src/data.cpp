#include "specstream/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace specstream {

void StreamConfig::validate() const {
    if (kind == StreamKind::corpus) {
        if (corpus_path.empty()) throw InputError("stream: corpus kind needs a corpus path");
        if (d == 0) throw InputError("stream: vocabulary size d must be >= 1");
        if (k == 0) throw InputError("stream: topic count k must be >= 1");
        return;
    }
    if (k == 0 || d == 0) throw InputError("stream: k and d must be >= 1");
    if (k > d) throw InputError("stream: synthetic streams need k <= d");
    if (!(p > 1.0 / static_cast<double>(d)) || p > 1.0)
        throw InputError("stream: p must lie in (1/d, 1]");
    const bool has_prior = !prior.empty();
    const bool has_schedule = !schedule.empty();
    if (kind == StreamKind::stochastic && !has_prior)
        throw InputError("stream: stochastic kind needs a prior");
    if (kind == StreamKind::nonstochastic && !has_schedule)
        throw InputError("stream: nonstochastic kind needs a schedule");
    if (kind == StreamKind::oracle && has_prior == has_schedule)
        throw InputError("stream: oracle kind needs exactly one of prior or schedule");
    if (has_prior) {
        if (prior.size() != k) throw InputError("stream: prior length must equal k");
        double sum = 0.0;
        for (double w : prior) {
            if (!(w >= 0.0)) throw InputError("stream: prior entries must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InputError("stream: prior must sum to 1");
    }
    if (has_schedule) {
        if (schedule.size() != k)
            throw InputError("stream: schedule length must equal k");
        std::size_t batch = 0;
        for (std::size_t c : schedule) batch += c;
        if (batch == 0) throw InputError("stream: schedule counts sum to zero");
    }
}

Matrix StreamConfig::word_matrix() const {
    Matrix u(d, k);
    const double off = d > 1 ? (1.0 - p) / static_cast<double>(d - 1) : 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t c = 0; c < k; ++c) u(i, c) = (i == c) ? p : off;
    return u;
}

ExactModel StreamConfig::exact_model() const {
    validate();
    if (!synthetic()) throw InputError("stream: no exact model for corpus streams");
    if (!schedule.empty()) {
        // the stationary omega slot carries the batch-averaged prior
        std::size_t batch = 0;
        for (std::size_t c : schedule) batch += c;
        Vector avg(k);
        for (std::size_t c = 0; c < k; ++c)
            avg[c] = static_cast<double>(schedule[c]) / static_cast<double>(batch);
        return ExactModel::scheduled(TopicParams::checked(avg, word_matrix()), schedule);
    }
    return ExactModel::stationary(TopicParams::checked(prior, word_matrix()));
}

SyntheticStream::SyntheticStream(const StreamConfig& cfg)
    : cfg_(cfg), scheduled_(!cfg.schedule.empty()), rng_(cfg.seed) {
    cfg_.validate();
    if (!cfg_.synthetic())
        throw InputError("SyntheticStream: corpus streams are loaded, not generated");
    for (std::size_t c : cfg_.schedule) batch_len_ += c;
}

std::size_t SyntheticStream::scheduled_topic(std::uint64_t t) const {
    std::size_t pos = static_cast<std::size_t>((t - 1) % batch_len_);
    for (std::size_t c = 0; c < cfg_.schedule.size(); ++c) {
        if (pos < cfg_.schedule[c]) return c;
        pos -= cfg_.schedule[c];
    }
    return cfg_.k - 1;  // unreachable: batch_len_ = sum of counts
}

LabeledTriple SyntheticStream::next() {
    const std::uint64_t t = ++t_;
    std::size_t topic = 0;
    if (scheduled_) {
        topic = scheduled_topic(t);
    } else {
        double a = rng_.next_double();
        for (std::size_t c = 0; c < cfg_.k; ++c) {
            if (a < cfg_.prior[c] || c + 1 == cfg_.k) {
                topic = c;
                break;
            }
            a -= cfg_.prior[c];
        }
    }

    // one uniform draw per word: peak word with probability p, otherwise the
    // remainder picks uniformly among the other d-1 words
    std::uint32_t w[3];
    for (auto& word : w) {
        const double a = rng_.next_double();
        if (a < cfg_.p) {
            word = static_cast<std::uint32_t>(topic);
        } else {
            const double r = (a - cfg_.p) / (1.0 - cfg_.p);
            auto idx = static_cast<std::uint32_t>(r * static_cast<double>(cfg_.d - 1));
            if (idx >= cfg_.d - 1) idx = static_cast<std::uint32_t>(cfg_.d - 2);
            word = idx >= topic ? idx + 1 : idx;
        }
    }
    return {OneHotTriple(w[0], w[1], w[2], static_cast<std::uint32_t>(cfg_.d)), topic};
}

Vector SyntheticStream::prior_at(std::uint64_t t) const {
    if (scheduled_) {
        Vector prior(cfg_.k, 0.0);
        prior[scheduled_topic(t)] = 1.0;
        return prior;
    }
    return cfg_.prior;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace

CorpusData load_corpus(const std::string& path, std::size_t d, TriplePolicy policy,
                       std::uint64_t seed) {
    if (d == 0) throw InputError("load_corpus: vocabulary size must be >= 1");

    std::ifstream first_pass(path);
    if (!first_pass) throw IoError("load_corpus: cannot open '" + path + "'");

    std::unordered_map<std::string, std::uint64_t> counts;
    std::size_t docs_total = 0;
    std::string line;
    while (std::getline(first_pass, line)) {
        ++docs_total;
        for (const std::string& tok : tokenize(line)) ++counts[tok];
    }
    if (counts.empty())
        throw IoError("load_corpus: '" + path + "' holds no tokens in " +
                      std::to_string(docs_total) + " documents");

    std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > d) ranked.resize(d);

    CorpusData out;
    out.docs_total = docs_total;
    std::unordered_map<std::string, std::uint32_t> index;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out.vocab.push_back(ranked[i].first);
        out.vocab_counts.push_back(ranked[i].second);
        index.emplace(ranked[i].first, static_cast<std::uint32_t>(i));
    }

    std::ifstream second_pass(path);
    if (!second_pass) throw IoError("load_corpus: cannot reopen '" + path + "'");
    Xoshiro256pp rng(seed);
    const auto vocab_dim = static_cast<std::uint32_t>(d);

    while (std::getline(second_pass, line)) {
        std::vector<std::uint32_t> in_vocab;
        for (const std::string& tok : tokenize(line)) {
            const auto it = index.find(tok);
            if (it != index.end()) in_vocab.push_back(it->second);
        }
        if (in_vocab.size() < 3) {
            ++out.docs_skipped;
            continue;
        }
        std::size_t pos[3];
        if (policy == TriplePolicy::first3 || in_vocab.size() == 3) {
            pos[0] = 0;
            pos[1] = 1;
            pos[2] = 2;
        } else {
            // three distinct positions by selection-without-replacement,
            // reported in document order
            const std::size_t n = in_vocab.size();
            std::size_t a = rng.next_below(n);
            std::size_t b = rng.next_below(n - 1);
            if (b >= a) ++b;
            std::size_t c = rng.next_below(n - 2);
            const std::size_t lo = std::min(a, b), hi = std::max(a, b);
            if (c >= lo) ++c;
            if (c >= hi) ++c;
            pos[0] = std::min({a, b, c});
            pos[2] = std::max({a, b, c});
            pos[1] = a + b + c - pos[0] - pos[2];
        }
        out.triples.emplace_back(in_vocab[pos[0]], in_vocab[pos[1]], in_vocab[pos[2]],
                                 vocab_dim);
    }
    return out;
}

void write_vocab_manifest(const std::string& path, const CorpusData& corpus) {
    std::ofstream out(path);
    if (!out) throw IoError("write_vocab_manifest: cannot write '" + path + "'");
    for (std::size_t i = 0; i < corpus.vocab.size(); ++i)
        out << i << '\t' << corpus.vocab[i] << '\t' << corpus.vocab_counts[i] << '\n';
    if (!out) throw IoError("write_vocab_manifest: write failed for '" + path + "'");
}

}  // namespace specstream
