#include "clonerlab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "clonerlab/boot_sim.hpp"
#include "clonerlab/cloner_core.hpp"
#include "clonerlab/disk_image.hpp"
#include "clonerlab/dos_fs.hpp"
#include "clonerlab/spread_sim.hpp"

namespace clonerlab::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

DiskImage load_image_arg(const std::string& path)
{
    try {
        return DiskImage::load_file(path);
    } catch (const Error& e) {
        throw Error(e.code(), std::string("expected a ") + std::to_string(kImageSize) +
                                  "-byte disk image: " + e.what());
    }
}

std::string hex2(std::uint8_t b)
{
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02X", b);
    return buf;
}

ordered_json report_json(const InfectionReport& report, const std::string& path)
{
    ordered_json j;
    j["report_version"] = kReportVersion;
    if (!path.empty())
        j["path"] = path;
    j["classification"] = to_string(report.classification);
    j["handler_state"] = to_string(report.handler_state);
    j["loader_present"] = report.loader_present;
    j["body_present"] = report.body_present;
    j["markers"] = {{"version", report.markers.version},
                    {"serial", report.markers.serial},
                    {"boot_count", report.markers.boot_count}};
    j["verdict"] = to_string(report.verdict);
    ordered_json evidence = ordered_json::array();
    for (const auto& e : report.evidence)
        evidence.push_back({{"location", e.location}, {"expected", e.expected}, {"found", e.found}});
    j["evidence"] = evidence;
    return j;
}

void print_report(const InfectionReport& report, const std::string& path, std::ostream& out)
{
    if (!path.empty())
        out << "image:          " << path << "\n";
    out << "classification: " << to_string(report.classification) << "\n"
        << "handler:        " << to_string(report.handler_state) << "\n"
        << "loader present: " << (report.loader_present ? "yes" : "no") << "\n"
        << "body present:   " << (report.body_present ? "yes" : "no") << "\n"
        << "markers:        version=" << hex2(report.markers.version)
        << " serial=" << hex2(report.markers.serial)
        << " boot_count=" << hex2(report.markers.boot_count) << "\n"
        << "verdict:        " << to_string(report.verdict) << "\n"
        << "evidence:\n";
    for (const auto& e : report.evidence)
        out << "  " << e.location << ": expected " << e.expected << "; found " << e.found << "\n";
}

ordered_json event_json(const BootEvent& e)
{
    ordered_json j;
    j["kind"] = to_string(e.kind);
    if (e.manifest)
        j["manifest"] = to_string(*e.manifest);
    if (e.value >= 0)
        j["value"] = e.value;
    if (!e.detail.empty())
        j["detail"] = e.detail;
    return j;
}

int do_detect(const std::string& path, bool json, std::ostream& out)
{
    DiskImage image = load_image_arg(path);
    InfectionReport report = detect(image);
    if (json)
        out << report_json(report, path).dump(2) << "\n";
    else
        print_report(report, path, out);
    return report.verdict == Verdict::Infected ? kExitInfected : kExitClean;
}

int do_infect(const std::string& in_path, const std::string& out_path, int serial,
              std::ostream& out, std::ostream& err)
{
    DiskImage image = load_image_arg(in_path);
    InfectResult result = infect(image, std::uint8_t(serial));
    for (auto w : result.warnings)
        err << "warning: " << to_string(w) << "\n";
    result.image.save_file(out_path);
    out << "wrote " << out_path << " (serial " << serial << ")\n";
    return kExitClean;
}

int do_disinfect(const std::string& in_path, const std::string& out_path,
                 const std::string& reference_path, std::ostream& out, std::ostream& err)
{
    DiskImage image = load_image_arg(in_path);
    std::optional<DiskImage> reference;
    if (!reference_path.empty())
        reference = load_image_arg(reference_path);
    DisinfectResult result = disinfect(image, reference ? &*reference : nullptr);
    for (auto w : result.warnings)
        err << "warning: " << to_string(w) << "\n";
    result.image.save_file(out_path);
    out << "wrote " << out_path << "\n";
    return kExitClean;
}

CommandInvocation parse_command_token(const std::string& token)
{
    static const std::map<std::string, Command> kNames = {
        {"LOAD", Command::Load}, {"BLOAD", Command::Bload}, {"CATALOG", Command::Catalog},
        {"RUN", Command::Run},   {"LIST", Command::List},   {"SAVE", Command::Save},
    };
    auto it = kNames.find(token);
    if (it != kNames.end())
        return {it->second, {}};
    if (token.rfind("PRINTD:", 0) == 0)
        return {Command::PrintControlD, token.substr(7)};
    throw Error(ErrorCode::InvalidConfig,
                "unknown command '" + token + "' (use LOAD|BLOAD|CATALOG|RUN|LIST|SAVE|PRINTD:<text>)");
}

int do_boot(const std::string& path, int count, const std::vector<std::string>& commands,
            bool json, bool write_back, std::ostream& out)
{
    std::vector<CommandInvocation> invocations;
    for (const auto& token : commands)
        invocations.push_back(parse_command_token(token));

    MachineState machine = new_machine();
    insert_disk(machine, load_image_arg(path));

    ordered_json jboots = ordered_json::array();
    ordered_json jcommands = ordered_json::array();
    for (int i = 1; i <= count; ++i) {
        std::vector<BootEvent> events = boot(machine);
        if (json) {
            ordered_json jevents = ordered_json::array();
            for (const auto& e : events)
                jevents.push_back(event_json(e));
            jboots.push_back(jevents);
        } else {
            out << "boot " << i << ":\n";
            for (const auto& e : events)
                out << "  " << to_string(e) << "\n";
        }
    }
    for (std::size_t i = 0; i < invocations.size(); ++i) {
        CommandResult result = run_command(machine, invocations[i]);
        if (json) {
            ordered_json jc;
            jc["command"] = commands[i];
            ordered_json jevents = ordered_json::array();
            for (const auto& e : result.events)
                jevents.push_back(event_json(e));
            jc["events"] = jevents;
            jc["output"] = result.output;
            jcommands.push_back(jc);
        } else {
            out << "command " << commands[i] << ":\n";
            for (const auto& e : result.events)
                out << "  " << to_string(e) << "\n";
            for (const auto& line : result.output)
                out << "  | " << line << "\n";
        }
    }
    if (json) {
        ordered_json j;
        j["report_version"] = kReportVersion;
        j["path"] = path;
        j["boots"] = jboots;
        j["commands"] = jcommands;
        out << j.dump(2) << "\n";
    }
    if (write_back && machine.inserted_disk)
        machine.inserted_disk->save_file(path);
    return kExitClean;
}

struct ScanRecord {
    std::string path;
    bool ok = false;
    std::string error;
    DiskClass cls = DiskClass::NonDosOrUnknown;
    Verdict verdict = Verdict::NotApplicable;
    bool susceptible = false;
    int serial = -1;
};

bool has_image_extension(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".dsk" || ext == ".do";
}

int do_scan(const std::string& dir, bool json, int jobs, std::ostream& out)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw Error(ErrorCode::IoError, "not a readable directory: " + dir);

    std::vector<std::string> paths;
    for (auto it = fs::recursive_directory_iterator(
             dir, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec)
            break;
        if (it->is_regular_file() && has_image_extension(it->path()))
            paths.push_back(it->path().string());
    }
    std::sort(paths.begin(), paths.end());

    std::vector<ScanRecord> records(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= paths.size())
                return;
            ScanRecord& rec = records[i];
            rec.path = paths[i];
            try {
                DiskImage image = DiskImage::load_file(paths[i]);
                InfectionReport report = detect(image);
                rec.ok = true;
                rec.cls = report.classification;
                rec.verdict = report.verdict;
                rec.susceptible = is_susceptible(image).susceptible;
                if (report.verdict == Verdict::Infected)
                    rec.serial = report.markers.serial;
            } catch (const Error& e) {
                rec.error = e.what();
            }
        }
    };
    int thread_count = std::max(1, jobs);
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < thread_count; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    std::map<DiskClass, int> class_counts;
    int total = 0, susceptible = 0, infected = 0;
    for (const auto& rec : records) {
        if (!rec.ok)
            continue;
        ++total;
        ++class_counts[rec.cls];
        if (rec.susceptible)
            ++susceptible;
        if (rec.verdict == Verdict::Infected)
            ++infected;
    }

    if (json) {
        ordered_json j;
        j["report_version"] = kReportVersion;
        j["total_images"] = total;
        j["classes"] = {{"Dos33Slave", class_counts[DiskClass::Dos33Slave]},
                        {"Dos33Master", class_counts[DiskClass::Dos33Master]},
                        {"ProDos", class_counts[DiskClass::ProDos]},
                        {"NonDosOrUnknown", class_counts[DiskClass::NonDosOrUnknown]}};
        j["susceptible_count"] = susceptible;
        j["infected_count"] = infected;
        ordered_json images = ordered_json::array();
        for (const auto& rec : records) {
            if (!rec.ok)
                continue;
            ordered_json ji;
            ji["path"] = rec.path;
            ji["class"] = to_string(rec.cls);
            ji["verdict"] = to_string(rec.verdict);
            if (rec.serial >= 0)
                ji["serial"] = rec.serial;
            images.push_back(ji);
        }
        j["images"] = images;
        ordered_json errors = ordered_json::array();
        for (const auto& rec : records)
            if (!rec.ok)
                errors.push_back({{"path", rec.path}, {"reason", rec.error}});
        j["errors"] = errors;
        out << j.dump(2) << "\n";
    } else {
        for (const auto& rec : records) {
            if (rec.ok) {
                out << rec.path << ": " << to_string(rec.cls) << ", " << to_string(rec.verdict);
                if (rec.serial >= 0)
                    out << " (serial " << rec.serial << ")";
                out << "\n";
            } else {
                out << rec.path << ": error: " << rec.error << "\n";
            }
        }
        out << "total " << total << " | slave " << class_counts[DiskClass::Dos33Slave]
            << " master " << class_counts[DiskClass::Dos33Master] << " prodos "
            << class_counts[DiskClass::ProDos] << " other "
            << class_counts[DiskClass::NonDosOrUnknown] << " | susceptible " << susceptible
            << " infected " << infected << "\n";
    }
    return infected > 0 ? kExitInfected : kExitClean;
}

SpreadConfig parse_spread_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config parse failure: ") + e.what());
    }
    SpreadConfig config;
    try {
        config.num_computers = j.value("num_computers", config.num_computers);
        config.num_users = j.value("num_users", config.num_users);
        config.disks_per_user = j.value("disks_per_user", config.disks_per_user);
        config.steps = j.value("steps", config.steps);
        config.p_reboot = j.value("p_reboot", config.p_reboot);
        config.p_move = j.value("p_move", config.p_move);
        config.rng_seed = j.value("rng_seed", config.rng_seed);
        for (const auto& ji : j.value("initial_infections", nlohmann::json::array()))
            config.initial_infections.push_back({ji.at("user").get<int>(),
                                                 ji.at("disk").get<int>(),
                                                 std::uint8_t(ji.at("serial").get<int>())});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad config field: ") + e.what());
    }
    return config;
}

ordered_json result_json(const SpreadResult& result, const SpreadSummary& summary)
{
    ordered_json j;
    j["report_version"] = kReportVersion;
    j["rng"] = {{"kind", result.rng_kind}, {"seed", result.rng_seed}};
    j["total_disks"] = result.total_disks;
    ordered_json steps = ordered_json::array();
    for (const auto& s : result.per_step)
        steps.push_back({{"infected_disks", s.infected_disk_count},
                         {"resident_machines", s.resident_machine_count}});
    j["per_step"] = steps;
    j["lineage"] = result.lineage;
    ordered_json hist = ordered_json::object();
    for (const auto& [serial, n] : summary.lineage_histogram)
        hist[std::to_string(serial)] = n;
    j["summary"] = {{"attack_rate", summary.attack_rate},
                    {"time_to_half_infected", summary.time_to_half_infected
                                                  ? ordered_json(*summary.time_to_half_infected)
                                                  : ordered_json(nullptr)},
                    {"lineage_histogram", hist}};
    if (!result.trace.empty()) {
        ordered_json trace = ordered_json::array();
        for (const auto& t : result.trace)
            trace.push_back({{"step", t.step},
                             {"user", t.user},
                             {"computer", t.computer},
                             {"disk", t.disk},
                             {"rebooted", t.rebooted},
                             {"replicated", t.replicated}});
        j["trace"] = trace;
    }
    return j;
}

int do_spread(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_path, bool json, bool trace, std::ostream& out)
{
    SpreadConfig config = parse_spread_config(config_path);
    if (seed)
        config.rng_seed = *seed;
    SpreadResult result = run_simulation(config, trace);
    SpreadSummary summary = summarize(result);
    ordered_json j = result_json(result, summary);
    if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::trunc);
        if (!file)
            throw Error(ErrorCode::IoError, "cannot write " + out_path);
        file << j.dump(2) << "\n";
    }
    if (json) {
        out << j.dump(2) << "\n";
    } else {
        out << "disks infected: "
            << (result.per_step.empty() ? 0 : result.per_step.back().infected_disk_count) << "/"
            << result.total_disks << "  attack rate: " << summary.attack_rate
            << "  time to half: "
            << (summary.time_to_half_infected ? std::to_string(*summary.time_to_half_infected)
                                              : std::string("never"))
            << "\n";
        for (const auto& [serial, n] : summary.lineage_histogram)
            out << "  serial " << serial << ": " << n << " disk(s)\n";
    }
    return kExitClean;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Apple DOS 3.3 disk forensics and boot-sector virus lab"};
    app.name("clonerlab");
    app.require_subcommand(1);

    std::string path, out_path, reference_path, config_path, dir;
    bool json = false, write_back = false, trace = false;
    int serial = 0, count = 1, jobs = int(std::thread::hardware_concurrency());
    if (jobs < 1)
        jobs = 1;
    std::vector<std::string> commands;
    std::optional<std::uint64_t> seed_override;

    auto* detect_cmd = app.add_subcommand("detect", "inspect one image for an infection");
    detect_cmd->add_option("path", path, "disk image (.dsk/.do)")->required();
    detect_cmd->add_flag("--json", json, "structured report");

    auto* infect_cmd = app.add_subcommand("infect", "write an infected copy of an image");
    infect_cmd->add_option("in", path)->required();
    infect_cmd->add_option("out", out_path)->required();
    infect_cmd->add_option("--serial", serial, "serial byte to embed")
        ->required()
        ->check(CLI::Range(0, 255));

    auto* disinfect_cmd = app.add_subcommand("disinfect", "write a cleaned copy of an image");
    disinfect_cmd->add_option("in", path)->required();
    disinfect_cmd->add_option("out", out_path)->required();
    disinfect_cmd->add_option("--reference-dos", reference_path,
                              "clean image supplying the DOS tail sectors");

    auto* boot_cmd = app.add_subcommand("boot", "simulate boots and DOS commands");
    boot_cmd->add_option("path", path)->required();
    boot_cmd->add_option("--count", count, "number of consecutive boots")
        ->check(CLI::PositiveNumber);
    boot_cmd->add_option("--command", commands,
                         "command to run after booting (repeatable); "
                         "LOAD|BLOAD|CATALOG|RUN|LIST|SAVE|PRINTD:<text>");
    boot_cmd->add_flag("--json", json);
    boot_cmd->add_flag("--write-back", write_back, "persist counter writes to the input file");

    auto* scan_cmd = app.add_subcommand("scan", "classify every image under a directory");
    scan_cmd->add_option("dir", dir)->required();
    scan_cmd->add_flag("--json", json);
    scan_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* spread_cmd = app.add_subcommand("spread", "run the propagation simulation");
    spread_cmd->add_option("--config", config_path, "JSON simulation config")->required();
    spread_cmd->add_option("--seed", seed_override, "override the config's rng_seed");
    spread_cmd->add_option("--out", out_path, "write the result JSON here");
    spread_cmd->add_flag("--json", json);
    spread_cmd->add_flag("--trace", trace, "record per-action trace in the result");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitClean;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        if (detect_cmd->parsed())
            return do_detect(path, json, out);
        if (infect_cmd->parsed())
            return do_infect(path, out_path, serial, out, err);
        if (disinfect_cmd->parsed())
            return do_disinfect(path, out_path, reference_path, out, err);
        if (boot_cmd->parsed())
            return do_boot(path, count, commands, json, write_back, out);
        if (scan_cmd->parsed())
            return do_scan(dir, json, jobs, out);
        if (spread_cmd->parsed())
            return do_spread(config_path, seed_override, out_path, json, trace, out);
    } catch (const Error& e) {
        err << error_code_name(e.code()) << ": " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace clonerlab::cli
