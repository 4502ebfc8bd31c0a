#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "ptycho/io.hpp"

using namespace ptycho;
using namespace ptycho::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Blind ptychography experiments: simulate, audit, ambiguity, reconstruct"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
        sub->add_option("-s,--set", overrides, "override a setting, e.g. recon.inner_iters=30");
    };

    auto* sim = app.add_subcommand("simulate", "write truth object/probe, scan table and diffraction data");
    add_config(sim);

    auto* aud = app.add_subcommand("audit", "uniqueness report for a scan pattern");
    add_config(aud);
    std::string scan_file;
    aud->add_option("--scan", scan_file, "scan table file (tau q kind / k l t1 t2)");
    int audit_m = 0;
    aud->add_option("-m", audit_m, "probe side (defaults to geometry.m)");

    auto* amb = app.add_subcommand("ambiguity", "construct a data-equivalent pair and verify it");
    add_config(amb);
    AmbiguityParams prm;
    amb->add_option("--class", prm.kind, "scaling | affine | progression | pathology")
        ->check(CLI::IsMember({"scaling", "affine", "progression", "pathology"}));
    amb->add_option("--scale", prm.c, "scaling constant c");
    amb->add_option("--a", prm.a, "probe phase offset");
    amb->add_option("--b", prm.b, "object phase offset");
    amb->add_option("--w1", prm.w[0], "affine slope along columns (rad/pixel)");
    amb->add_option("--w2", prm.w[1], "affine slope along rows (rad/pixel)");
    amb->add_option("--theta00", prm.theta00, "block phase of the first block");
    amb->add_option("--r1", prm.r[0], "progression step along columns, in units of 2 pi/q");
    amb->add_option("--r2", prm.r[1], "progression step along rows, in units of 2 pi/q");
    amb->add_option("--psi-seed", prm.psi_seed, "seed of the random tau x tau phase block");

    auto* rec = app.add_subcommand("reconstruct", "alternating minimization from diffraction data");
    add_config(rec);
    std::string data_path;
    rec->add_option("--data", data_path, "PTYD file (defaults to <output.dir>/data.ptyd)");

    auto* dump = app.add_subcommand("config", "print the effective configuration");
    add_config(dump);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        const ExperimentConfig cfg = load_config(config_path, overrides);
        if (sim->parsed()) {
            cmd_simulate(cfg, std::cout);
        } else if (aud->parsed()) {
            ScanPattern p = [&] {
                if (scan_file.empty()) return make_pattern(cfg);
                std::ifstream in(scan_file);
                if (!in) throw FormatError("cannot open scan file '" + scan_file + "'");
                try {
                    return read_scan_pattern(in);
                } catch (const Error& e) {
                    throw FormatError(scan_file + ": " + e.what());
                }
            }();
            cmd_audit(p, audit_m > 0 ? audit_m : cfg.m, std::cout);
        } else if (amb->parsed()) {
            cmd_ambiguity(cfg, prm, std::cout);
        } else if (rec->parsed()) {
            cmd_reconstruct(cfg, data_path, std::cout);
        } else if (dump->parsed()) {
            write_config(std::cout, cfg);
        }
    } catch (const NumericFailure& e) {
        std::cerr << "ptycho: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "ptycho: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}
