#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "specstream/data.hpp"
#include "specstream/em.hpp"
#include "specstream/eval.hpp"
#include "specstream/spectral.hpp"

namespace specstream {

struct AlgorithmSpec {
    enum class Type { spectral, em, oracle_spectral };

    Type type = Type::spectral;
    // spectral
    std::size_t reservoir = 10000;
    PowerMethodConfig pm;
    bool incremental_m2 = false;
    // em
    double alpha = 0.7;
    std::size_t minibatch = 1;

    std::string label() const;
    void validate() const;
};

struct ExperimentSpec {
    StreamConfig stream;
    std::vector<AlgorithmSpec> algorithms;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = ".";

    void validate() const;
};

// INI-style experiment file: a [stream] section, a [run] section, and one
// [algorithm] section per algorithm. Errors carry "<name>:<line>:" prefixes.
ExperimentSpec parse_spec_text(const std::string& text, const std::string& name);
ExperimentSpec parse_spec_file(const std::string& path);

struct CellSummary {
    std::string label;
    std::uint64_t seed = 0;
    double final_l1 = 0.0;                 // average predictive NLL at the horizon
    std::optional<double> final_l2;        // average recovery error, when a reference exists
    std::optional<double> final_regret;    // cumulative regret at the horizon (oracle streams)
    std::string csv_path;
};

// Executes every (algorithm, seed) cell: streams the data, steps the
// algorithm once per document, and writes one CSV trace per cell plus a
// seed-averaged CSV per algorithm. Oracle streams additionally get a
// t,bound file with the 4 sqrt(d^3) log t envelope. Returns per-cell final
// metrics in (algorithm, seed) order.
std::vector<CellSummary> run(const ExperimentSpec& spec);

struct RecoverOptions {
    std::string corpus_path;
    std::size_t vocab_size = 500;
    std::size_t topics = 5;
    TriplePolicy policy = TriplePolicy::first3;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    PowerMethodConfig pm;
};

// Offline spectral recovery over a whole corpus; writes omega.txt, u.txt
// and vocab.tsv into the output directory.
void recover_corpus(const RecoverOptions& opts);

// Shortest round-trip decimal form; the CSV writers use this so identical
// runs produce byte-identical files.
std::string format_double(double v);

}  // namespace specstream
