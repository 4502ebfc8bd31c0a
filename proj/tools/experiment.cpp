#include "experiment.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <random>
#include <sstream>

#include "ptycho/io.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/synth.hpp"

namespace ptycho::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("bad value for " + key + ": '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad value for " + key + ": '" + v + "' (expected true/false)");
}

const char* boundary_name(BoundaryKind k)
{
    switch (k) {
    case BoundaryKind::periodic: return "periodic";
    case BoundaryKind::dark: return "dark";
    case BoundaryKind::bright: return "bright";
    }
    return "?";
}

std::string path_in(const ExperimentConfig& cfg, const std::string& name)
{
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const ExperimentConfig& cfg)
{
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw FormatError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
}

} // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in)
{
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& v)
{
    using Setter = std::function<void()>;
    auto i = [&](int& dst) { return Setter([&] { dst = parse_number<int>(key, v); }); };
    auto u64 = [&](std::uint64_t& dst) { return Setter([&] { dst = parse_number<std::uint64_t>(key, v); }); };
    auto d = [&](double& dst) { return Setter([&] { dst = parse_number<double>(key, v); }); };
    auto b = [&](bool& dst) { return Setter([&] { dst = parse_bool(key, v); }); };
    auto s = [&](std::string& dst) { return Setter([&] { dst = v; }); };

    const std::map<std::string, Setter> table{
        {"geometry.n", i(c.n)},
        {"geometry.m", i(c.m)},
        {"geometry.boundary",
         [&] {
             if (v == "periodic") c.boundary.kind = BoundaryKind::periodic;
             else if (v == "dark") c.boundary.kind = BoundaryKind::dark;
             else if (v == "bright") c.boundary.kind = BoundaryKind::bright;
             else throw ConfigError("geometry.boundary must be periodic, dark or bright");
         }},
        {"geometry.bright_re", [&] { c.boundary.bright_value.real(parse_number<double>(key, v)); }},
        {"geometry.bright_im", [&] { c.boundary.bright_value.imag(parse_number<double>(key, v)); }},
        {"scan.kind",
         [&] {
             try {
                 c.scan_kind = scan_kind_from_string(v);
             } catch (const Error& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"scan.tau", i(c.tau)},
        {"scan.delta_max", i(c.delta_max)},
        {"scan.seed", u64(c.scan_seed)},
        {"scan.file", s(c.scan_file)},
        {"probe.seed", u64(c.probe_seed)},
        {"probe.file", s(c.probe_file)},
        {"object.name", s(c.object_name)},
        {"object.seed", u64(c.object_seed)},
        {"object.file", s(c.object_file)},
        {"forward.os", i(c.os)},
        {"recon.max_epochs", i(c.recon.max_epochs)},
        {"recon.inner_iters", i(c.recon.inner_iters)},
        {"recon.tol_data", d(c.recon.tol_data)},
        {"recon.enforce_boundary", b(c.recon.enforce_boundary)},
        {"recon.pinv_guard", d(c.recon.pinv_guard)},
        {"recon.stagnation_window", i(c.recon.stagnation_window)},
        {"recon.stagnation_tol", d(c.recon.stagnation_tol)},
        {"recon.re_window", i(c.recon.re_window)},
        {"recon.seed", u64(c.recon.seed)},
        {"recon.object_seed",
         [&] {
             if (v == "ones") c.recon.object_seed = ObjectSeed::ones;
             else if (v == "data") c.recon.object_seed = ObjectSeed::data;
             else throw ConfigError("recon.object_seed must be ones or data");
         }},
        {"recon.exec",
         [&] {
             if (v == "serial") c.recon.exec = Exec::serial;
             else if (v == "parallel") c.recon.exec = Exec::parallel;
             else throw ConfigError("recon.exec must be serial or parallel");
         }},
        {"recon.init",
         [&] {
             if (v == "aligned_random") c.init_mode = ProbeInitMode::aligned_random;
             else if (v == "given") c.init_mode = ProbeInitMode::given;
             else throw ConfigError("recon.init must be aligned_random or given");
         }},
        {"recon.init_seed", u64(c.init_seed)},
        {"recon.init_file", s(c.init_file)},
        {"recon.require_tol", b(c.require_tol)},
        {"recon.report_truth", b(c.report_truth)},
        {"output.dir", s(c.out_dir)},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second();
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides)
{
    ExperimentConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open config '" + path + "'");
        for (const auto& [k, v] : parse_key_values(in)) apply_setting(cfg, k, v);
    }
    for (const auto& o : overrides) {
        std::istringstream line(o);
        for (const auto& [k, v] : parse_key_values(line)) apply_setting(cfg, k, v);
    }
    if (cfg.n <= 0 || cfg.m <= 0 || cfg.m > cfg.n) throw ConfigError("need 0 < m <= n");
    if (cfg.os < 1) throw ConfigError("forward.os must be >= 1");
    if (cfg.recon.max_epochs < 1 || cfg.recon.inner_iters < 1) throw ConfigError("recon iteration counts must be >= 1");
    return cfg;
}

void write_config(std::ostream& out, const ExperimentConfig& c)
{
    out << std::setprecision(17);
    out << "geometry.n=" << c.n << "\ngeometry.m=" << c.m << "\ngeometry.boundary=" << boundary_name(c.boundary.kind)
        << "\ngeometry.bright_re=" << c.boundary.bright_value.real()
        << "\ngeometry.bright_im=" << c.boundary.bright_value.imag() << "\nscan.kind=" << to_string(c.scan_kind)
        << "\nscan.tau=" << c.tau << "\nscan.delta_max=" << c.delta_max << "\nscan.seed=" << c.scan_seed
        << "\nscan.file=" << c.scan_file << "\nprobe.seed=" << c.probe_seed << "\nprobe.file=" << c.probe_file
        << "\nobject.name=" << c.object_name << "\nobject.seed=" << c.object_seed << "\nobject.file=" << c.object_file
        << "\nforward.os=" << c.os << "\nrecon.max_epochs=" << c.recon.max_epochs
        << "\nrecon.inner_iters=" << c.recon.inner_iters << "\nrecon.tol_data=" << c.recon.tol_data
        << "\nrecon.enforce_boundary=" << (c.recon.enforce_boundary ? "true" : "false")
        << "\nrecon.pinv_guard=" << c.recon.pinv_guard << "\nrecon.stagnation_window=" << c.recon.stagnation_window
        << "\nrecon.stagnation_tol=" << c.recon.stagnation_tol << "\nrecon.re_window=" << c.recon.re_window
        << "\nrecon.seed=" << c.recon.seed
        << "\nrecon.object_seed=" << (c.recon.object_seed == ObjectSeed::ones ? "ones" : "data")
        << "\nrecon.exec=" << (c.recon.exec == Exec::serial ? "serial" : "parallel")
        << "\nrecon.init=" << (c.init_mode == ProbeInitMode::aligned_random ? "aligned_random" : "given")
        << "\nrecon.init_seed=" << c.init_seed << "\nrecon.init_file=" << c.init_file
        << "\nrecon.require_tol=" << (c.require_tol ? "true" : "false")
        << "\nrecon.report_truth=" << (c.report_truth ? "true" : "false") << "\noutput.dir=" << c.out_dir << '\n';
}

GridGeometry make_geometry(const ExperimentConfig& cfg)
{
    try {
        return GridGeometry(cfg.n, cfg.m, cfg.boundary);
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

ScanPattern make_pattern(const ExperimentConfig& cfg)
{
    if (!cfg.scan_file.empty()) {
        std::ifstream in(cfg.scan_file);
        if (!in) throw FormatError("cannot open scan file '" + cfg.scan_file + "'");
        ScanPattern p = [&] {
            try {
                return read_scan_pattern(in);
            } catch (const Error& e) {
                throw FormatError(cfg.scan_file + ": " + e.what());
            }
        }();
        if (p.n() != cfg.n) throw ConfigError("scan file covers n=" + std::to_string(p.n()) + ", config has n=" +
                                              std::to_string(cfg.n));
        return p;
    }
    if (cfg.tau <= 0 || cfg.n % cfg.tau != 0)
        throw ConfigError("scan.tau=" + std::to_string(cfg.tau) + " must divide geometry.n=" + std::to_string(cfg.n));
    const int q = cfg.n / cfg.tau;
    try {
        switch (cfg.scan_kind) {
        case ScanKind::raster: return raster(cfg.n, cfg.tau);
        case ScanKind::perturbed_separable:
            return perturbed_separable(cfg.n, cfg.tau, random_separable_delta(q, cfg.delta_max, cfg.scan_seed),
                                       random_separable_delta(q, cfg.delta_max, cfg.scan_seed + 1000));
        case ScanKind::perturbed_full:
            return perturbed_full(cfg.n, cfg.tau, random_full_delta(q, cfg.delta_max, cfg.scan_seed),
                                  random_full_delta(q, cfg.delta_max, cfg.scan_seed + 1000));
        }
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unhandled scan kind");
}

ComplexImage make_object(const ExperimentConfig& cfg)
{
    if (!cfg.object_file.empty()) {
        ComplexImage f = load_ptyc(cfg.object_file);
        if (f.rows() != cfg.n || f.cols() != cfg.n) throw ConfigError("object file is not n x n");
        return f;
    }
    try {
        return synthetic_object(cfg.object_name, cfg.n, cfg.object_seed);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

ComplexImage make_probe(const ExperimentConfig& cfg)
{
    if (!cfg.probe_file.empty()) {
        ComplexImage p = load_ptyc(cfg.probe_file);
        if (p.rows() != cfg.m || p.cols() != cfg.m) throw ConfigError("probe file is not m x m");
        return p;
    }
    return random_phase_probe(cfg.m, cfg.probe_seed);
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log)
{
    const GridGeometry g = make_geometry(cfg);
    const ScanPattern p = make_pattern(cfg);
    const ComplexImage f = make_object(cfg);
    const ComplexImage mu = make_probe(cfg);
    const DiffractionSet b = measure(f, mu, g, p, cfg.os, cfg.recon.exec);

    ensure_out_dir(cfg);
    save_ptyc(path_in(cfg, "object.ptyc"), f);
    save_ptyc(path_in(cfg, "probe.ptyc"), mu);
    save_ptyd(path_in(cfg, "data.ptyd"), b);
    {
        std::ofstream out(path_in(cfg, "scan.txt"));
        if (!out) throw FormatError("cannot write scan.txt");
        write_scan_pattern(out, p);
    }
    const auto count = static_cast<int>(b.frames.size());
    log << "patterns=" << count << "\nframe_side=" << b.side() << "\nout_dir=" << cfg.out_dir << '\n';
    return count;
}

void cmd_audit(const ScanPattern& pattern, int m, std::ostream& out)
{
    const UniquenessReport r = audit(pattern, m);
    auto ints = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
        return s;
    };
    auto bools = [](const std::vector<bool>& v) {
        std::string s;
        for (std::size_t k = 0; k < v.size(); ++k) s += std::string(k ? "," : "") + (v[k] ? "1" : "0");
        return s;
    };
    out << std::setprecision(17) << "kind=" << to_string(pattern.kind()) << "\nn=" << pattern.n()
        << "\ntau=" << pattern.tau() << "\nq=" << pattern.q() << "\nm=" << m
        << "\nconditions_evaluated=" << (r.conditions_evaluated ? "true" : "false") << "\na1=" << ints(r.a1)
        << "\na2=" << ints(r.a2) << "\npasses_small1=" << bools(r.passes_small1)
        << "\npasses_cover2=" << bools(r.passes_cover2) << "\npasses_small2=" << bools(r.passes_small2)
        << "\nqualifying=" << ints(r.qualifying) << "\ngcd1=" << r.gcd1 << "\ngcd2=" << r.gcd2
        << "\ncoprime_ok=" << (r.coprime_ok ? "true" : "false") << "\noverlap_ratio=" << r.overlap_ratio
        << "\nmax_abs_delta=" << r.max_abs_delta
        << "\nperturbation_bounded=" << (r.perturbation_bounded ? "true" : "false") << '\n';
}

double cmd_ambiguity(const ExperimentConfig& cfg, const AmbiguityParams& prm, std::ostream& out)
{
    const GridGeometry g = make_geometry(cfg);
    const ScanPattern p = make_pattern(cfg);
    const ComplexImage f = make_object(cfg);
    const ComplexImage mu = make_probe(cfg);
    const double step = kTwoPi / p.q();
    const Vec2 r{prm.r[0] * step, prm.r[1] * step};

    SolutionPair s;
    std::string scheme = "-";
    if (prm.kind == "scaling") {
        if (prm.c == 0.0) throw ConfigError("scaling constant must be nonzero");
        s = scaling_pair(f, mu, prm.c);
    } else if (prm.kind == "affine") {
        s = affine_phase_pair(f, mu, prm.a, prm.b, prm.w);
    } else if (prm.kind == "progression" || prm.kind == "pathology") {
        if (p.kind() != ScanKind::raster) throw ConfigError(prm.kind + " requires a raster scan");
        scheme = 2 * p.tau() > cfg.m ? "over_shift" : "under_shift";
        if (prm.kind == "progression") {
            s = progression_pair(f, mu, p, prm.theta00, r);
        } else {
            std::mt19937_64 rng(prm.psi_seed);
            std::uniform_real_distribution<double> u(-kPi, kPi);
            RealImage psi(p.tau(), p.tau());
            for (auto& v : psi) v = u(rng);
            s = pathology_pair(f, mu, p, psi, prm.theta00, r);
        }
    } else {
        throw ConfigError("unknown ambiguity class '" + prm.kind + "'");
    }

    const double dev = verify_same_data(f, mu, s.object, s.probe, g, p, cfg.os);
    ensure_out_dir(cfg);
    save_ptyc(path_in(cfg, "g.ptyc"), s.object);
    save_ptyc(path_in(cfg, "nu.ptyc"), s.probe);
    const REResult re = relative_error(f, s.object, cfg.n / 2);
    out << std::setprecision(17) << "class=" << prm.kind << "\nscheme=" << scheme << "\nmax_dev=" << dev
        << "\nequivalent=" << (dev < 1e-10 ? "true" : "false") << "\nre_object=" << re.value << '\n';
    if (!(dev < 1e-10)) throw NumericFailure("constructed pair is not data-equivalent (max_dev=" +
                                             std::to_string(dev) + ")");
    return dev;
}

ReconState cmd_reconstruct(const ExperimentConfig& cfg, const std::string& data_path, std::ostream& out)
{
    const GridGeometry g = make_geometry(cfg);
    const std::string path = data_path.empty() ? path_in(cfg, "data.ptyd") : data_path;
    const DiffractionSet b = load_ptyd(path);
    if (b.m != cfg.m) throw ConfigError("data probe side " + std::to_string(b.m) + " != geometry.m");

    ReconExtras ex;
    ComplexImage start;
    if (cfg.init_mode == ProbeInitMode::given) {
        if (cfg.init_file.empty()) throw ConfigError("recon.init=given needs recon.init_file");
        start = load_ptyc(cfg.init_file);
        if (start.rows() != cfg.m || start.cols() != cfg.m) throw ConfigError("init probe is not m x m");
    } else {
        start = init_probe(make_probe(cfg), cfg.init_seed, ProbeInitMode::aligned_random);
    }
    if (cfg.report_truth) {
        ex.object_truth = make_object(cfg);
        ex.probe_truth = make_probe(cfg);
    }

    ReconState st = am_reconstruct(b, g, start, cfg.recon, ex);

    ensure_out_dir(cfg);
    save_ptyc(path_in(cfg, "f_est.ptyc"), st.f_est);
    save_ptyc(path_in(cfg, "probe_est.ptyc"), st.probe_est);
    {
        std::ofstream csv(path_in(cfg, "history.csv"));
        if (!csv) throw FormatError("cannot write history.csv");
        csv << history_csv(st.history);
    }

    const EpochRecord& last = st.history.back();
    out << std::setprecision(17) << "stop=" << to_string(st.stop) << "\nepochs=" << last.epoch
        << "\ndata_residual=" << last.data_residual << '\n';
    if (cfg.report_truth) {
        out << "re_object=" << last.re_object << "\nre_probe=" << last.re_probe << "\nfitted_slope="
            << st.last_re_object.best_r[0] << ',' << st.last_re_object.best_r[1] << '\n';
        const RampFit fit = ramp_fit(log_ratio_field(*ex.object_truth, st.f_est));
        out << "ramp_slope=" << fit.r[0] << ',' << fit.r[1] << "\nramp_residual=" << fit.residual << '\n';
    }
    if (cfg.require_tol && st.stop != StopReason::tolerance)
        throw NumericFailure(std::string("reconstruction stopped on ") + to_string(st.stop) +
                             " before reaching recon.tol_data");
    return st;
}

} // namespace ptycho::cli
