#include "specstream/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "specstream/log.hpp"

namespace specstream {

namespace fs = std::filesystem;

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string AlgorithmSpec::label() const {
    switch (type) {
        case Type::spectral: {
            std::string s = "spectral_m" + std::to_string(reservoir);
            if (incremental_m2) s += "_inc";
            return s;
        }
        case Type::em:
            return "em_a" + format_double(alpha) + "_mb" + std::to_string(minibatch);
        case Type::oracle_spectral:
            return "oracle";
    }
    return "unknown";
}

void AlgorithmSpec::validate() const {
    switch (type) {
        case Type::spectral:
            if (reservoir == 0) throw InputError("algorithm: reservoir must be >= 1");
            pm.validate();
            break;
        case Type::em:
            if (alpha < 0.5 || alpha > 1.0)
                throw InputError("algorithm: alpha must lie in [0.5, 1]");
            if (minibatch == 0) throw InputError("algorithm: minibatch must be >= 1");
            break;
        case Type::oracle_spectral:
            break;
    }
}

void ExperimentSpec::validate() const {
    stream.validate();
    if (stream.n == 0) throw InputError("run: horizon n must be >= 1");
    if (algorithms.empty()) throw InputError("run: at least one algorithm is required");
    if (seeds.empty()) throw InputError("run: at least one seed is required");
    std::vector<std::string> labels;
    for (const AlgorithmSpec& a : algorithms) {
        a.validate();
        if (a.type == AlgorithmSpec::Type::oracle_spectral &&
            stream.kind != StreamKind::oracle)
            throw InputError("run: oracle-spectral needs an oracle stream");
        labels.push_back(a.label());
    }
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
        throw InputError("run: two algorithm sections produce the same label");
}

// ---------------------------------------------------------------------------
// spec file parsing

namespace {

struct ParseCursor {
    std::string name;
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError(name + ":" + std::to_string(line) + ": " + msg);
    }
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const ParseCursor& at, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) at.fail("trailing characters after number '" + v + "'");
        return x;
    } catch (const InputError&) {
        throw;
    } catch (const std::exception&) {
        at.fail("expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_count(const ParseCursor& at, const std::string& v) {
    const double x = parse_real(at, v);
    if (x < 0.0 || x != std::floor(x)) at.fail("expected a nonnegative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

std::vector<std::string> split_ws(const std::string& v) {
    std::vector<std::string> parts;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) parts.push_back(tok);
    return parts;
}

}  // namespace

ExperimentSpec parse_spec_text(const std::string& text, const std::string& name) {
    ExperimentSpec spec;
    bool seen_stream = false, seen_run = false;

    enum class Section { none, stream, run, algorithm };
    Section section = Section::none;

    ParseCursor at{name, 0};
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++at.line;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            const std::string sec = trim(line.substr(1, line.size() - 2));
            if (sec == "stream") {
                if (seen_stream) at.fail("duplicate [stream] section");
                seen_stream = true;
                section = Section::stream;
            } else if (sec == "run") {
                if (seen_run) at.fail("duplicate [run] section");
                seen_run = true;
                section = Section::run;
            } else if (sec == "algorithm") {
                spec.algorithms.emplace_back();
                section = Section::algorithm;
            } else {
                at.fail("unknown section [" + sec + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) at.fail("empty key");
        if (value.empty()) at.fail("empty value for key '" + key + "'");

        switch (section) {
            case Section::none:
                at.fail("key '" + key + "' outside of any section");
            case Section::stream: {
                StreamConfig& s = spec.stream;
                if (key == "kind") {
                    if (value == "stochastic") s.kind = StreamKind::stochastic;
                    else if (value == "nonstochastic") s.kind = StreamKind::nonstochastic;
                    else if (value == "oracle") s.kind = StreamKind::oracle;
                    else if (value == "corpus") s.kind = StreamKind::corpus;
                    else at.fail("unknown stream kind '" + value + "'");
                } else if (key == "k") {
                    s.k = static_cast<std::size_t>(parse_count(at, value));
                } else if (key == "d") {
                    s.d = static_cast<std::size_t>(parse_count(at, value));
                } else if (key == "n") {
                    s.n = parse_count(at, value);
                } else if (key == "p") {
                    s.p = parse_real(at, value);
                } else if (key == "prior") {
                    s.prior.clear();
                    for (const std::string& tok : split_ws(value))
                        s.prior.push_back(parse_real(at, tok));
                } else if (key == "schedule") {
                    s.schedule.clear();
                    for (const std::string& tok : split_ws(value))
                        s.schedule.push_back(static_cast<std::size_t>(parse_count(at, tok)));
                } else if (key == "corpus") {
                    s.corpus_path = value;
                } else if (key == "policy") {
                    if (value == "first3") s.policy = TriplePolicy::first3;
                    else if (value == "rand3") s.policy = TriplePolicy::rand3;
                    else at.fail("unknown policy '" + value + "'");
                } else if (key == "seed") {
                    s.seed = parse_count(at, value);
                } else {
                    at.fail("unknown key '" + key + "' in [stream]");
                }
                break;
            }
            case Section::run: {
                if (key == "seeds") {
                    spec.seeds.clear();
                    for (const std::string& tok : split_ws(value))
                        spec.seeds.push_back(parse_count(at, tok));
                } else if (key == "output") {
                    spec.output_dir = value;
                } else {
                    at.fail("unknown key '" + key + "' in [run]");
                }
                break;
            }
            case Section::algorithm: {
                AlgorithmSpec& a = spec.algorithms.back();
                if (key == "type") {
                    if (value == "spectral") a.type = AlgorithmSpec::Type::spectral;
                    else if (value == "em") a.type = AlgorithmSpec::Type::em;
                    else if (value == "oracle-spectral")
                        a.type = AlgorithmSpec::Type::oracle_spectral;
                    else at.fail("unknown algorithm type '" + value + "'");
                } else if (key == "reservoir") {
                    a.reservoir = static_cast<std::size_t>(parse_count(at, value));
                } else if (key == "restarts") {
                    a.pm.restarts = static_cast<std::size_t>(parse_count(at, value));
                } else if (key == "iterations") {
                    a.pm.iterations = static_cast<std::size_t>(parse_count(at, value));
                } else if (key == "tol") {
                    a.pm.tol = parse_real(at, value);
                } else if (key == "incremental") {
                    if (value == "true") a.incremental_m2 = true;
                    else if (value == "false") a.incremental_m2 = false;
                    else at.fail("expected true or false for 'incremental'");
                } else if (key == "alpha") {
                    a.alpha = parse_real(at, value);
                } else if (key == "minibatch") {
                    a.minibatch = static_cast<std::size_t>(parse_count(at, value));
                } else {
                    at.fail("unknown key '" + key + "' in [algorithm]");
                }
                break;
            }
        }
    }

    at.line = 0;
    if (!seen_stream) at.fail("missing [stream] section");
    if (!seen_run) at.fail("missing [run] section");
    return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec_text(buf.str(), path);
}

// ---------------------------------------------------------------------------
// runner

namespace {

void write_atomically(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw IoError("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

constexpr const char* kCsvHeader = "t,loss,nll,recovery_err,cum_regret,fallback";

std::string csv_row(const StepMetrics& m) {
    std::string row = std::to_string(m.t);
    row += ',';
    row += format_double(m.loss);
    row += ',';
    row += format_double(m.nll);
    row += ',';
    if (m.recovery_err) row += format_double(*m.recovery_err);
    row += ',';
    if (m.cum_regret) row += format_double(*m.cum_regret);
    row += ',';
    row += m.fallback;
    row += '\n';
    return row;
}

struct CellOutput {
    CellSummary summary;
    std::string csv;  // full file content
};

// Everything one cell needs, precomputed once per run(). The corpus triples
// and the hindsight reference are shared across cells.
struct RunContext {
    const ExperimentSpec& spec;
    std::optional<ExactModel> model;           // synthetic kinds
    std::optional<TopicParams> hindsight;      // reference for recovery_err
    std::vector<OneHotTriple> corpus_triples;  // corpus kind
};

std::vector<OneHotTriple> cell_stream(const RunContext& ctx, std::uint64_t seed) {
    const StreamConfig& sc = ctx.spec.stream;
    if (sc.kind == StreamKind::corpus) {
        return {ctx.corpus_triples.begin(),
                ctx.corpus_triples.begin() + static_cast<std::ptrdiff_t>(sc.n)};
    }
    StreamConfig per_cell = sc;
    per_cell.seed = seed;
    SyntheticStream stream(per_cell);
    std::vector<OneHotTriple> docs;
    docs.reserve(sc.n);
    for (std::uint64_t t = 0; t < sc.n; ++t) docs.push_back(stream.next().x);
    return docs;
}

CellOutput run_cell(const RunContext& ctx, const AlgorithmSpec& algo, std::uint64_t seed) {
    const StreamConfig& sc = ctx.spec.stream;
    const std::uint64_t n = sc.n;
    const std::vector<OneHotTriple> docs = cell_stream(ctx, seed);
    const bool oracle_stream = sc.kind == StreamKind::oracle;
    const TopicParams* ref = ctx.hindsight ? &*ctx.hindsight : nullptr;

    // algorithm state
    std::optional<SpectralLeader> leader;
    std::optional<StepwiseEm> em;
    Vector prior_sum;  // oracle-spectral running sums of exact priors
    if (algo.type == AlgorithmSpec::Type::spectral) {
        SpectralConfig cfg;
        cfg.reservoir_capacity = algo.reservoir;
        cfg.pm = algo.pm;
        cfg.incremental_m2 = algo.incremental_m2;
        leader.emplace(sc.d, sc.k, cfg, derive_seed(seed, 10));
    } else if (algo.type == AlgorithmSpec::Type::em) {
        em.emplace(sc.k, sc.d, EmConfig{algo.alpha, algo.minibatch}, derive_seed(seed, 11));
    } else {
        prior_sum.assign(sc.k, 0.0);
    }

    MetricAccumulator acc;
    double cum_regret = 0.0;
    std::string csv = kCsvHeader;
    csv += '\n';

    CellOutput out;
    for (std::uint64_t t = 1; t <= n; ++t) {
        const OneHotTriple& x = docs[t - 1];
        TopicParams predicted = TopicParams::uniform(sc.k, sc.d);
        std::string fallback;

        if (leader) {
            auto [params, diag] = leader->step(x);
            predicted = std::move(params);
            fallback = diag.fallback_code();
        } else if (em) {
            predicted = em->params();
            em->step(x);
        } else {
            // noise-free prediction: the exact average of past distributions
            if (t > 1) {
                Vector avg = prior_sum;
                for (double& v : avg) v /= static_cast<double>(t - 1);
                predicted = TopicParams::checked(std::move(avg), ctx.model->params.u);
            }
            const Vector pt = ctx.model->prior_at(t);
            for (std::size_t c = 0; c < prior_sum.size(); ++c) prior_sum[c] += pt[c];
        }

        StepMetrics m;
        m.t = t;
        m.loss = loss(predicted, x);
        m.nll = doc_nll(predicted, x);
        if (ref) m.recovery_err = tensor_sq_distance(predicted, *ref);
        if (oracle_stream) {
            cum_regret += m.loss - loss(*ref, x);
            m.cum_regret = cum_regret;
        }
        m.fallback = std::move(fallback);
        acc.observe(t, predicted, x, ref);
        csv += csv_row(m);
    }

    out.summary.label = algo.label();
    out.summary.seed = seed;
    out.summary.final_l1 = acc.l1();
    if (ref) out.summary.final_l2 = acc.l2();
    if (oracle_stream) out.summary.final_regret = cum_regret;
    out.csv = std::move(csv);
    return out;
}

// Average the numeric columns of the per-seed traces; a field is emitted
// only when every seed has it, and the fallback column stays empty.
void write_mean_csv(const std::string& path, const std::vector<std::string>& seed_paths) {
    std::vector<std::ifstream> files;
    files.reserve(seed_paths.size());
    for (const std::string& p : seed_paths) {
        files.emplace_back(p);
        if (!files.back()) throw IoError("cannot reopen '" + p + "'");
        std::string header;
        std::getline(files.back(), header);
    }

    std::string content = kCsvHeader;
    content += '\n';
    std::string line;
    while (std::getline(files[0], line)) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(files.size());
        const auto split = [](const std::string& s) {
            std::vector<std::string> fields;
            std::size_t start = 0;
            while (true) {
                const auto comma = s.find(',', start);
                if (comma == std::string::npos) {
                    fields.push_back(s.substr(start));
                    break;
                }
                fields.push_back(s.substr(start, comma - start));
                start = comma + 1;
            }
            return fields;
        };
        rows.push_back(split(line));
        for (std::size_t f = 1; f < files.size(); ++f) {
            std::string other;
            if (!std::getline(files[f], other))
                throw IoError("per-seed traces have different lengths");
            rows.push_back(split(other));
        }

        content += rows[0][0];  // t is identical across seeds
        for (std::size_t col = 1; col <= 4; ++col) {
            content += ',';
            bool all_present = true;
            double sum = 0.0;
            for (const auto& fields : rows) {
                if (fields[col].empty()) {
                    all_present = false;
                    break;
                }
                sum += std::stod(fields[col]);
            }
            if (all_present)
                content += format_double(sum / static_cast<double>(rows.size()));
        }
        content += ",\n";
    }
    write_atomically(path, content);
}

}  // namespace

std::vector<CellSummary> run(const ExperimentSpec& spec) {
    spec.validate();

    RunContext ctx{spec, {}, {}, {}};
    if (spec.stream.kind == StreamKind::corpus) {
        CorpusData corpus = load_corpus(spec.stream.corpus_path, spec.stream.d,
                                        spec.stream.policy, spec.stream.seed);
        if (corpus.triples.size() < spec.stream.n)
            throw InputError("run: corpus yields " + std::to_string(corpus.triples.size()) +
                             " documents, fewer than the horizon n");
        SPECSTREAM_LOG_INFO("corpus: " + std::to_string(corpus.triples.size()) +
                            " documents, " + std::to_string(corpus.docs_skipped) +
                            " skipped");
        // the best model in hindsight is learned offline from the full corpus
        PowerMethodConfig pm;
        ctx.hindsight = offline_recover(corpus.triples, spec.stream.d, spec.stream.k, pm,
                                        derive_seed(spec.stream.seed, 99));
        ctx.corpus_triples = std::move(corpus.triples);

        fs::create_directories(spec.output_dir);
        CorpusData manifest_only;
        manifest_only.vocab = std::move(corpus.vocab);
        manifest_only.vocab_counts = std::move(corpus.vocab_counts);
        write_vocab_manifest((fs::path(spec.output_dir) / "vocab.tsv").string(),
                             manifest_only);
    } else {
        ctx.model = spec.stream.exact_model();
        ctx.hindsight = hindsight_params(*ctx.model, spec.stream.n);
        fs::create_directories(spec.output_dir);
    }

    struct Cell {
        const AlgorithmSpec* algo;
        std::uint64_t seed;
        CellOutput out;
    };
    std::vector<Cell> cells;
    for (const AlgorithmSpec& algo : spec.algorithms)
        for (std::uint64_t seed : spec.seeds) cells.push_back({&algo, seed, {}});

    // cells are independent; fan out over a small worker pool
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()),
                              cells.size());
    const auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                cells[i].out = run_cell(ctx, *cells[i].algo, cells[i].seed);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    // per-seed traces, then seed-averaged traces per algorithm
    std::vector<CellSummary> summaries;
    std::map<std::string, std::vector<std::string>> seed_paths;
    for (Cell& cell : cells) {
        const std::string name =
            cell.out.summary.label + "_seed" + std::to_string(cell.seed) + ".csv";
        const std::string path = (fs::path(spec.output_dir) / name).string();
        write_atomically(path, cell.out.csv);
        cell.out.summary.csv_path = path;
        seed_paths[cell.out.summary.label].push_back(path);
        summaries.push_back(cell.out.summary);
    }
    for (const auto& [label, paths] : seed_paths)
        write_mean_csv((fs::path(spec.output_dir) / (label + "_mean.csv")).string(), paths);

    if (spec.stream.kind == StreamKind::oracle) {
        const double scale =
            4.0 * std::sqrt(std::pow(static_cast<double>(spec.stream.d), 3.0));
        std::string content = "t,bound\n";
        for (std::uint64_t t = 1; t <= spec.stream.n; ++t) {
            content += std::to_string(t);
            content += ',';
            content += format_double(scale * std::log(static_cast<double>(t)));
            content += '\n';
        }
        write_atomically((fs::path(spec.output_dir) / "bound.csv").string(), content);
    }
    return summaries;
}

void recover_corpus(const RecoverOptions& opts) {
    CorpusData corpus = load_corpus(opts.corpus_path, opts.vocab_size, opts.policy, opts.seed);
    if (corpus.triples.empty())
        throw InputError("recover: no documents with 3 in-vocabulary tokens (skipped " +
                         std::to_string(opts.corpus_path.size()) + ")");
    SPECSTREAM_LOG_INFO("recover: " + std::to_string(corpus.triples.size()) +
                        " documents, " + std::to_string(corpus.docs_skipped) + " skipped");
    const TopicParams params = offline_recover(corpus.triples, opts.vocab_size, opts.topics,
                                               opts.pm, derive_seed(opts.seed, 1));

    fs::create_directories(opts.output_dir);
    std::string omega_text;
    for (std::size_t c = 0; c < params.k(); ++c) {
        if (c) omega_text += ' ';
        omega_text += format_double(params.omega[c]);
    }
    omega_text += '\n';
    write_atomically((fs::path(opts.output_dir) / "omega.txt").string(), omega_text);

    std::string u_text;
    for (std::size_t i = 0; i < params.d(); ++i) {
        for (std::size_t c = 0; c < params.k(); ++c) {
            if (c) u_text += ' ';
            u_text += format_double(params.u(i, c));
        }
        u_text += '\n';
    }
    write_atomically((fs::path(opts.output_dir) / "u.txt").string(), u_text);
    write_vocab_manifest((fs::path(opts.output_dir) / "vocab.tsv").string(), corpus);
}

}  // namespace specstream
