#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/ambiguity.hpp"
#include "ptycho/recon.hpp"

namespace ptycho::cli {

/// Bad config key/value or inconsistent settings. Maps to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Convergence or verification failure. Maps to exit code 1.
class NumericFailure : public Error {
public:
    using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

struct ExperimentConfig {
    // geometry.*
    int n = 64;
    int m = 16;
    Boundary boundary;

    // scan.*
    ScanKind scan_kind = ScanKind::raster;
    int tau = 8;
    int delta_max = 2;
    std::uint64_t scan_seed = 1;
    std::string scan_file;  ///< explicit "tau q kind" table; overrides kind/tau/seed

    // probe.*
    std::uint64_t probe_seed = 8;
    std::string probe_file;

    // object.*
    std::string object_name = "cib_like";
    std::uint64_t object_seed = 1;
    std::string object_file;

    int os = kDefaultOversampling;

    // recon.*
    ReconConfig recon;
    ProbeInitMode init_mode = ProbeInitMode::aligned_random;
    std::uint64_t init_seed = 4;
    std::string init_file;       ///< probe start when init = given
    bool require_tol = false;    ///< exit 1 unless the run stops on tol_data
    bool report_truth = true;    ///< record RE against the configured truths

    // output.*
    std::string out_dir = ".";
};

/// key=value lines; '#' starts a comment; blank lines ignored. Later keys win.
std::map<std::string, std::string> parse_key_values(std::istream& in);

/// Applies one setting. Unknown keys and malformed values throw ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Reads `path` (may be empty) and then applies `overrides` ("key=value").
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// Canonical dump, every key in a fixed order.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

GridGeometry make_geometry(const ExperimentConfig& cfg);
ScanPattern make_pattern(const ExperimentConfig& cfg);
ComplexImage make_object(const ExperimentConfig& cfg);
ComplexImage make_probe(const ExperimentConfig& cfg);

/// Writes object.ptyc, probe.ptyc, data.ptyd and scan.txt into out_dir.
/// Returns the number of diffraction patterns.
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);

/// Prints the uniqueness report as key=value lines.
void cmd_audit(const ScanPattern& pattern, int m, std::ostream& out);

struct AmbiguityParams {
    std::string kind = "pathology";  ///< scaling | affine | progression | pathology
    double c = 1.0;
    double a = 0.0;
    double b = 0.0;
    Vec2 w{0.0, 0.0};        ///< pixel slope for affine (rad/pixel)
    double theta00 = 0.0;
    Vec2 r{0.0, 0.0};        ///< lattice steps for progression/pathology, in units of 2 pi/q
    std::uint64_t psi_seed = 1;
};

/// Writes g.ptyc and nu.ptyc and prints the verification report. Throws
/// NumericFailure when the pair is not data-equivalent to 1e-10.
double cmd_ambiguity(const ExperimentConfig& cfg, const AmbiguityParams& params, std::ostream& out);

/// Loads data (default out_dir/data.ptyd), runs the reconstruction and
/// writes f_est.ptyc, probe_est.ptyc and history.csv.
ReconState cmd_reconstruct(const ExperimentConfig& cfg, const std::string& data_path, std::ostream& out);

} // namespace ptycho::cli
