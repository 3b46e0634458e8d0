#include "dispatch.hpp"

#include "steinkit/clt.hpp"
#include "steinkit/corpus.hpp"
#include "steinkit/errors.hpp"
#include "steinkit/io.hpp"
#include "steinkit/kernel.hpp"
#include "steinkit/normal_approx.hpp"
#include "steinkit/recover.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace steinkit::cli {

namespace {

struct Options {
    std::string spec_path;
    std::string out_path;
    int grid = 4096;
    std::string n_list = "4,16,64,256";
    double tol = QuadratureConfig{}.abs_tol;
    double tail = QuadratureConfig{}.tail_quantile;
};

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> ns;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw SpecError("bad --n entry '" + item + "'");
        }
        if (used != item.size() || n < 1) throw SpecError("bad --n entry '" + item + "'");
        ns.push_back(n);
    }
    if (ns.empty()) throw SpecError("--n needs at least one value");
    return ns;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SpecError("cannot write " + path.string());
    f << text;
    if (!f) throw SpecError("failed writing " + path.string());
}

// Writes `text` to --out when given, else to the stream.
void emit(const Options& opt, const std::string& text, std::ostream& out) {
    if (opt.out_path.empty()) {
        out << text;
    } else {
        write_file(opt.out_path, text);
    }
}

std::filesystem::path sidecar(const std::string& path) {
    return std::filesystem::path(path).replace_extension(".json");
}

QuadratureConfig config_from(const Options& opt) {
    QuadratureConfig cfg;
    cfg.abs_tol = opt.tol;
    cfg.tail_quantile = opt.tail;
    if (!(cfg.abs_tol > 0.0)) throw SpecError("--tol must be positive");
    cfg.validate();
    return cfg;
}

int gate_exit(const ExistenceReport& report, std::ostream& err) {
    if (report.verdict == Verdict::exists) return ok;
    err << "error: no Stein kernel: " << io::existence_json(report) << "\n";
    return report.verdict == Verdict::degenerate ? degenerate : no_kernel;
}

int run_check(const Options& opt, std::ostream& out) {
    const auto spec = load_spec(opt.spec_path);
    const auto report = existence_check(spec);
    out << io::existence_json(report) << "\n";
    switch (report.verdict) {
        case Verdict::exists: return ok;
        case Verdict::not_exists: return no_kernel;
        case Verdict::degenerate: return degenerate;
    }
    return ok;
}

int run_kernel(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto spec = load_spec(opt.spec_path);
    const auto cfg = config_from(opt);
    if (int code = gate_exit(existence_check(spec), err)) return code;
    const auto kernel = stein_kernel(spec, opt.grid, cfg);
    const std::string csv = io::kernel_csv(kernel);
    const std::string descriptor = io::kernel_descriptor_json(kernel) + "\n";
    if (opt.out_path.empty()) {
        out << csv;
    } else {
        write_file(opt.out_path, csv);
        write_file(sidecar(opt.out_path), descriptor);
    }
    return ok;
}

int run_bound(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto spec = load_spec(opt.spec_path);
    const auto cfg = config_from(opt);
    if (int code = gate_exit(existence_check(spec), err)) return code;
    const auto kernel = stein_kernel(spec, std::min(opt.grid, 256), cfg);
    emit(opt, io::discrepancy_json(discrepancy_bounds(spec, kernel, cfg)) + "\n", out);
    return ok;
}

int run_clt(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto spec = load_spec(opt.spec_path);
    const auto cfg = config_from(opt);
    const auto ns = parse_n_list(opt.n_list);
    if (int code = gate_exit(existence_check(spec), err)) return code;
    const auto curve = clt_curve(spec, ns, opt.grid, cfg);
    for (const auto& w : curve.warnings) err << "warning: " << w << "\n";
    const std::string csv = io::curve_csv(curve);
    const std::string summary = io::curve_json(curve) + "\n";
    if (opt.out_path.empty()) {
        out << csv;
    } else {
        write_file(opt.out_path, csv);
        write_file(sidecar(opt.out_path), summary);
    }
    return ok;
}

int run_recover(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto spec = load_spec(opt.spec_path);
    const auto cfg = config_from(opt);
    if (int code = gate_exit(existence_check(spec), err)) return code;
    const auto kernel = stein_kernel(spec, 256, cfg);
    const auto density = recover_density(kernel, spec.moments().mean, opt.grid, cfg);
    emit(opt, io::density_csv(density), out);
    return ok;
}

int run_corpus(const Options& opt, std::ostream& out) {
    const auto cfg = config_from(opt);
    const auto rows = corpus::run(cfg);
    const std::string table = corpus::format_table(rows);
    emit(opt, table, out);
    const bool all_passed = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.passed; });
    return all_passed ? ok : numerical_failure;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stein kernels for mixed univariate laws", "steinkit"};
    app.require_subcommand(1, 1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool needs_spec) {
        if (needs_spec) sub->add_option("spec", opt.spec_path, "Distribution spec (JSON)")->required();
        sub->add_option("--out", opt.out_path, "Output file (default: stdout)");
        sub->add_option("--grid", opt.grid, "Grid size")->check(CLI::Range(16, 1 << 24));
        sub->add_option("--tol", opt.tol, "Absolute quadrature tolerance");
        sub->add_option("--tail", opt.tail, "Tail quantile for truncating unbounded supports");
    };

    auto* check = app.add_subcommand("check", "Decide whether a Stein kernel exists");
    check->add_option("spec", opt.spec_path, "Distribution spec (JSON)")->required();
    auto* kernel = app.add_subcommand("kernel", "Tabulate the Stein kernel");
    add_common(kernel, true);
    auto* bound = app.add_subcommand("bound", "Total variation to the matched normal and its bounds");
    add_common(bound, true);
    auto* clt = app.add_subcommand("clt", "CLT bound and exact convolution distance");
    add_common(clt, true);
    clt->add_option("--n", opt.n_list, "Comma-separated sample sizes");
    auto* recover = app.add_subcommand("recover", "Rebuild the density from the kernel");
    add_common(recover, true);
    auto* corpus_cmd = app.add_subcommand("corpus", "Run the golden corpus");
    add_common(corpus_cmd, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return parse_error;
    }

    try {
        if (check->parsed()) return run_check(opt, out);
        if (kernel->parsed()) return run_kernel(opt, out, err);
        if (bound->parsed()) return run_bound(opt, out, err);
        if (clt->parsed()) return run_clt(opt, out, err);
        if (recover->parsed()) return run_recover(opt, out, err);
        if (corpus_cmd->parsed()) return run_corpus(opt, out);
    } catch (const SpecError& e) {
        err << "error: " << e.what() << "\n";
        return parse_error;
    } catch (const ExistenceError& e) {
        err << "error: " << e.what() << "\n";
        return e.degenerate() ? degenerate : no_kernel;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    }
    return parse_error;
}

}  // namespace steinkit::cli
