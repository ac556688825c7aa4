// Command-line front end: run one scenario, sweep kill times, measure peak
// throughput, or materialize preset scenarios.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paxsim/paxsim.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw paxsim::ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

paxsim::Scenario load_scenario(const std::string& path) {
    paxsim::Scenario sc = paxsim::parse_scenario(slurp(path));
    if (sc.name == "scenario") sc.name = fs::path(path).stem().string();
    return sc;
}

void print_summary(const paxsim::RunResult& r) {
    std::cout << "peak_mbps=" << paxsim::fmt_fixed(r.summary.peak_mbps, 3)
              << " mean_mbps=" << paxsim::fmt_fixed(r.summary.mean_mbps, 3)
              << " p99_latency_ms=" << paxsim::fmt_fixed(r.summary.p99_latency_ms, 3)
              << " max_gap_s=" << paxsim::fmt_fixed(r.summary.max_gap_s, 3)
              << " decisions_total=" << r.summary.decisions_total
              << " audits=" << (r.audits_ok ? "ok" : "FAILED") << "\n";
    if (!r.audits_ok) std::cout << "audit detail: " << r.audit_detail << "\n";
}

int cmd_run(const std::string& file, std::uint64_t seed, bool seed_set,
            const std::string& out_dir) {
    paxsim::Scenario sc = load_scenario(file);
    if (seed_set) sc.seed = seed;
    const paxsim::RunResult r = paxsim::run_scenario(sc);
    const fs::path dir = out_dir.empty() ? fs::path("out_" + sc.name) : fs::path(out_dir);
    paxsim::write_outputs(r, dir);
    std::cout << "scenario " << sc.name << ": " << r.events << " events, outputs in "
              << dir.string() << "\n";
    print_summary(r);
    return r.audits_ok ? 0 : 1;
}

int cmd_sweep(const std::string& base_file, std::vector<double> kill_times,
              const std::string& steering, double cap_mbps, bool cap_set,
              const std::string& out_dir) {
    paxsim::Scenario base = load_scenario(base_file);
    if (cap_set) base.cap_mbps = cap_mbps;
    if (base.kill_node.empty())
        base.kill_node = paxsim::default_victim(base.variant);
    const bool steer = steering == "on";
    const auto points = paxsim::sweep_kill_times(base, kill_times, steer);

    std::ostringstream csv;
    csv << "kill_s,downtime_s,pre_kill_mbps,decisions_total\n";
    bool all_ok = true;
    for (const auto& p : points) {
        std::cout << "kill " << paxsim::fmt_fixed(p.kill_s, 1) << " s -> downtime "
                  << paxsim::fmt_fixed(p.downtime_s, 2) << " s (pre-kill "
                  << paxsim::fmt_fixed(p.pre_kill_mbps, 2) << " Mb/s)"
                  << (p.audits_ok ? "" : " AUDIT FAILURE") << "\n";
        csv << paxsim::fmt_fixed(p.kill_s, 3) << ',' << paxsim::fmt_fixed(p.downtime_s, 3)
            << ',' << paxsim::fmt_fixed(p.pre_kill_mbps, 3) << ',' << p.decisions << '\n';
        all_ok = all_ok && p.audits_ok;
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        paxsim::write_text_file(fs::path(out_dir) / "sweep.csv", csv.str());
    }
    return all_ok ? 0 : 1;
}

int cmd_peak(const std::string& base_file, const std::string& out_dir) {
    paxsim::Scenario base = load_scenario(base_file);
    base.cap_mbps = 0;
    base.kill_node.clear();
    const paxsim::RunResult r = paxsim::run_scenario(base);
    std::cout << "sustained peak of " << base.name << ": "
              << paxsim::fmt_fixed(r.summary.mean_mbps, 3) << " Mb/s (best window "
              << paxsim::fmt_fixed(r.summary.peak_mbps, 3) << ")\n";
    if (!out_dir.empty()) paxsim::write_outputs(r, out_dir);
    return r.audits_ok ? 0 : 1;
}

int cmd_preset(const std::string& name, const std::string& write_dir) {
    if (name.empty()) {
        for (const auto& n : paxsim::preset_names()) std::cout << n << "\n";
        return 0;
    }
    const paxsim::Scenario sc = paxsim::preset(name);
    const std::string text = paxsim::render_scenario(sc);
    if (write_dir.empty()) {
        std::cout << text;
    } else {
        fs::create_directories(write_dir);
        paxsim::write_text_file(fs::path(write_dir) / (name + ".scenario"), text);
        std::cout << "wrote " << (fs::path(write_dir) / (name + ".scenario")).string()
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic Paxos deployment simulator"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir, base_file, steering = "off", preset_name,
                preset_dir;
    std::uint64_t seed = 0;
    double cap_mbps = 0;
    std::vector<double> kill_times;

    auto* run = app.add_subcommand("run", "simulate one scenario file");
    run->add_option("scenario", scenario_file, "scenario file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_dir, "output directory (default out_<name>)");

    auto* sweep = app.add_subcommand("sweep", "rerun with a series of kill times");
    sweep->add_option("--base", base_file, "base scenario file")->required();
    sweep->add_option("--kill-times", kill_times, "kill times in seconds")
        ->delimiter(',');
    sweep->add_option("--steering", steering, "quorum steering: on|off")
        ->check(CLI::IsMember({"on", "off"}));
    auto* cap_opt = sweep->add_option("--cap-mbps", cap_mbps, "admission cap override");
    sweep->add_option("--out", out_dir, "directory for sweep.csv");

    auto* peak = app.add_subcommand("peak", "measure sustained uncapped throughput");
    peak->add_option("--base", base_file, "base scenario file")->required();
    peak->add_option("--out", out_dir, "also write the full output bundle here");

    auto* preset = app.add_subcommand("preset", "list or materialize presets");
    preset->add_option("name", preset_name, "preset name (omit to list)");
    preset->add_option("--dir", preset_dir, "write <name>.scenario into this directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_file, seed, seed_opt->count() > 0, out_dir);
        if (sweep->parsed())
            return cmd_sweep(base_file, kill_times, steering, cap_mbps,
                             cap_opt->count() > 0, out_dir);
        if (peak->parsed()) return cmd_peak(base_file, out_dir);
        if (preset->parsed()) return cmd_preset(preset_name, preset_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
