// Command-line surface: file compression/decompression with the four mixer
// kinds, a corpus benchmark, and the offline verification suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glmix/engine.hpp"
#include "glmix/optlab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path.string());
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read error: " + path.string());
    return data;
}

void write_file(const fs::path& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write error: " + path.string());
}

glmix::MixerKind parse_mixer(const std::string& name) {
    if (name == "geo") return glmix::MixerKind::Geometric;
    if (name == "lin") return glmix::MixerKind::Linear;
    if (name == "beta") return glmix::MixerKind::Beta;
    if (name == "logistic") return glmix::MixerKind::Logistic;
    throw CLI::ValidationError("--mixer", "unknown mixer: " + name);
}

struct MixerOptions {
    std::string mixer = "geo";
    std::optional<double> alpha;
    std::optional<double> epsilon;

    glmix::EngineConfig config() const {
        glmix::EngineConfig cfg;
        cfg.mixer = parse_mixer(mixer);
        cfg.alpha = alpha;
        cfg.epsilon = epsilon;
        return cfg;
    }
};

void add_mixer_options(CLI::App* cmd, MixerOptions& opt) {
    cmd->add_option("--mixer", opt.mixer, "mixture rule: geo|lin|beta|logistic")
        ->check(CLI::IsMember({"geo", "lin", "beta", "logistic"}));
    cmd->add_option("--alpha", opt.alpha, "gradient step size (default per mixer)");
    cmd->add_option("--epsilon", opt.epsilon, "weight floor (default per mixer)");
}

int run_compress(const std::string& input, const std::string& output, const MixerOptions& opt,
                 const std::string& trace_path) {
    const auto data = read_file(input);
    const glmix::EngineConfig cfg = opt.config();

    std::ofstream trace_out;
    glmix::TraceFn trace_fn;
    if (!trace_path.empty()) {
        trace_out.open(trace_path);
        if (!trace_out) throw std::runtime_error("cannot open trace file: " + trace_path);
        glmix::write_trace_header(trace_out);
        trace_fn = [&trace_out](const glmix::TraceRecord& r) {
            glmix::write_trace_record(trace_out, r);
        };
    }

    const glmix::CompressResult r =
        glmix::compress(data, cfg, trace_fn ? &trace_fn : nullptr);
    write_file(output, r.frame);

    const double bpc = data.empty() ? 0.0
                                    : 8.0 * static_cast<double>(r.frame.size()) /
                                          static_cast<double>(data.size());
    std::printf("%s: %zu -> %zu bytes (%.3f bpc, model %.3f bpc)\n", input.c_str(), data.size(),
                r.frame.size(), bpc,
                data.empty() ? 0.0 : r.stats.ideal_bits / static_cast<double>(data.size()));
    return kExitOk;
}

int run_decompress(const std::string& input, const std::string& output,
                   const std::string& mixer) {
    const auto frame = read_file(input);
    const glmix::FrameHeader h = glmix::parse_frame_header(frame);
    glmix::EngineConfig cfg;
    cfg.mixer = mixer.empty() ? h.mixer : parse_mixer(mixer);
    const auto data = glmix::decompress(frame, cfg);
    write_file(output, data);
    std::printf("%s: %zu -> %zu bytes (%s)\n", input.c_str(), frame.size(), data.size(),
                glmix::to_string(cfg.mixer));
    return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchCell {
    double bits = 0.0;
    double bpc = 0.0;
    std::size_t frame_bytes = 0;
};

struct BenchRow {
    std::string name;
    std::size_t input_bytes = 0;
    std::vector<BenchCell> cells;  // one per mixer kind
};

struct BenchReport {
    std::vector<std::string> kinds;
    std::vector<BenchRow> rows;
    std::vector<double> average_bpc;
};

BenchReport run_bench_on(const std::vector<fs::path>& files,
                         const std::vector<std::string>& kinds) {
    BenchReport rep;
    rep.kinds = kinds;
    for (const fs::path& p : files) {
        BenchRow row;
        row.name = p.filename().string();
        const auto data = read_file(p);
        row.input_bytes = data.size();
        for (const std::string& k : kinds) {
            glmix::EngineConfig cfg;
            cfg.mixer = parse_mixer(k);
            const glmix::CompressResult r = glmix::compress(data, cfg);
            BenchCell cell;
            cell.bits = r.stats.ideal_bits;
            cell.bpc = data.empty() ? 0.0 : r.stats.ideal_bits / static_cast<double>(data.size());
            cell.frame_bytes = r.frame.size();
            row.cells.push_back(cell);
        }
        rep.rows.push_back(std::move(row));
    }
    rep.average_bpc.assign(kinds.size(), 0.0);
    for (const BenchRow& row : rep.rows)
        for (std::size_t j = 0; j < kinds.size(); ++j) rep.average_bpc[j] += row.cells[j].bpc;
    for (double& v : rep.average_bpc) v /= static_cast<double>(rep.rows.size());
    return rep;
}

void print_bench_md(std::ostream& os, const BenchReport& rep) {
    os << "| File | Size |";
    for (const auto& k : rep.kinds) os << ' ' << k << " |";
    for (const auto& k : rep.kinds) os << ' ' << k << " bytes |";
    os << "\n|---|---:|";
    for (std::size_t j = 0; j < 2 * rep.kinds.size(); ++j) os << "---:|";
    os << '\n';
    char buf[64];
    for (const BenchRow& row : rep.rows) {
        double best = 1e300;
        for (const BenchCell& c : row.cells) best = std::min(best, c.bpc);
        os << "| " << row.name << " | " << row.input_bytes << " |";
        for (const BenchCell& c : row.cells) {
            std::snprintf(buf, sizeof buf, "%.3f", c.bpc);
            if (c.bpc <= best) os << " **" << buf << "** |";
            else os << ' ' << buf << " |";
        }
        for (const BenchCell& c : row.cells) os << ' ' << c.frame_bytes << " |";
        os << '\n';
    }
    double best_avg = 1e300;
    for (double v : rep.average_bpc) best_avg = std::min(best_avg, v);
    os << "| Average | |";
    for (double v : rep.average_bpc) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        if (v <= best_avg) os << " **" << buf << "** |";
        else os << ' ' << buf << " |";
    }
    for (std::size_t j = 0; j < rep.kinds.size(); ++j) os << " |";
    os << '\n';
}

void print_bench_csv(std::ostream& os, const BenchReport& rep) {
    os << "file,input_bytes";
    for (const auto& k : rep.kinds) os << ',' << k << "_bits," << k << "_bpc," << k << "_bytes";
    os << '\n';
    char buf[128];
    for (const BenchRow& row : rep.rows) {
        os << row.name << ',' << row.input_bytes;
        for (const BenchCell& c : row.cells) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%zu", c.bits, c.bpc, c.frame_bytes);
            os << buf;
        }
        os << '\n';
    }
    os << "Average,";
    for (double v : rep.average_bpc) {
        std::snprintf(buf, sizeof buf, ",,%.17g,", v);
        os << buf;
    }
    os << '\n';
}

int run_bench(const std::string& dir, std::vector<std::string> kinds, const std::string& format,
              const std::string& out_path) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    if (files.empty()) throw std::runtime_error("bench: no files in " + dir);
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    const BenchReport rep = run_bench_on(files, kinds);
    std::ostringstream os;
    if (format == "md") print_bench_md(os, rep);
    else print_bench_csv(os, rep);
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << os.str();
    }
    return kExitOk;
}

// --- verify ----------------------------------------------------------------

json suite_to_json(const glmix::optlab::SuiteReport& r) {
    json j;
    j["name"] = r.name;
    j["trials"] = r.trials;
    j["violations"] = r.violations;
    j["degenerate"] = r.degenerate;
    j["worst"] = r.worst;
    if (r.first_failure) {
        const auto& f = *r.first_failure;
        j["first_failure"] = {{"trial", f.trial},   {"models", f.models},
                              {"alphabet", f.alphabet}, {"dists", f.dists},
                              {"weights", f.weights},   {"value", f.value}};
    }
    return j;
}

int run_verify(const std::string& suite, std::size_t trials, std::uint64_t seed,
               const std::string& out_path) {
    std::vector<glmix::optlab::SuiteReport> reports;
    if (suite == "paq-equiv" || suite == "all")
        reports.push_back(glmix::optlab::suite_paq_equiv(trials, seed));
    if (suite == "oracles" || suite == "all")
        reports.push_back(glmix::optlab::suite_oracles(std::min<std::size_t>(trials, 400), seed));
    if (suite == "convexity" || suite == "all")
        reports.push_back(glmix::optlab::suite_convexity(trials, seed));
    if (suite == "dominance" || suite == "all")
        reports.push_back(glmix::optlab::suite_dominance(trials, seed));

    std::size_t total = 0;
    json j;
    j["seed"] = seed;
    j["trials"] = trials;
    j["suites"] = json::array();
    for (const auto& r : reports) {
        j["suites"].push_back(suite_to_json(r));
        total += r.violations;
    }
    j["violations_total"] = total;

    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << text;
    }
    for (const auto& r : reports)
        std::fprintf(stderr, "suite %-10s trials=%zu violations=%zu\n", r.name.c_str(), r.trials,
                     r.violations);
    return total == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"glmix: context-mixing compressor with geometric, linear, beta and "
                 "logistic mixtures, plus an offline verification lab"};
    app.require_subcommand(1);

    // compress
    auto* c = app.add_subcommand("compress", "compress a file into a GLMX frame");
    std::string c_in, c_out, c_trace;
    MixerOptions c_opt;
    c->add_option("input", c_in, "input file")->required();
    c->add_option("output", c_out, "output frame")->required();
    add_mixer_options(c, c_opt);
    c->add_option("--trace", c_trace, "write a per-bit CSV trace to this path");

    // decompress
    auto* d = app.add_subcommand("decompress", "decompress a GLMX frame");
    std::string d_in, d_out, d_mixer;
    d->add_option("input", d_in, "input frame")->required();
    d->add_option("output", d_out, "output file")->required();
    d->add_option("--mixer", d_mixer, "require this mixer kind (default: from frame)")
        ->check(CLI::IsMember({"geo", "lin", "beta", "logistic"}));

    // bench
    auto* b = app.add_subcommand("bench", "per-file bpc table over a corpus directory");
    std::string b_dir, b_format = "md", b_out;
    std::vector<std::string> b_kinds{"geo", "lin", "beta"};
    b->add_option("corpus", b_dir, "corpus directory")->required();
    b->add_option("--mixers", b_kinds, "mixer kinds to benchmark")
        ->delimiter(',')
        ->check(CLI::IsMember({"geo", "lin", "beta", "logistic"}));
    b->add_option("--format", b_format, "output format")->check(CLI::IsMember({"md", "csv"}));
    b->add_option("--output", b_out, "write the table here instead of stdout");

    // verify
    auto* v = app.add_subcommand("verify", "run the optimization-lab verification suites");
    std::string v_suite, v_out;
    std::size_t v_trials = 1000;
    std::uint64_t v_seed = 1;
    v->add_option("--suite", v_suite, "convexity|oracles|paq-equiv|dominance|all")
        ->required()
        ->check(CLI::IsMember({"convexity", "oracles", "paq-equiv", "dominance", "all"}));
    v->add_option("--trials", v_trials, "number of random instances")
        ->check(CLI::PositiveNumber);
    v->add_option("--seed", v_seed, "random seed");
    v->add_option("--out", v_out, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*c) return run_compress(c_in, c_out, c_opt, c_trace);
        if (*d) return run_decompress(d_in, d_out, d_mixer);
        if (*b) return run_bench(b_dir, b_kinds, b_format, b_out);
        if (*v) return run_verify(v_suite, v_trials, v_seed, v_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}
