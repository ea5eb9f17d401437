#ifndef CLONERLAB_SPREAD_SIM_HPP
#define CLONERLAB_SPREAD_SIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace clonerlab {

// ---------------------------------------------------------------------------
// Seeded agent-based model of the virus moving through a pool of shared
// computers.  Disks are full disk images, so the epidemic layer exercises
// the same byte-exact infection path as the forensic tools.
// ---------------------------------------------------------------------------

struct SeedInfection {
    int user = 0;
    int disk = 0;
    std::uint8_t serial = 0;
};

struct SpreadConfig {
    int num_computers = 1;
    int num_users = 1;
    int disks_per_user = 1;
    std::vector<SeedInfection> initial_infections;
    int steps = 1;
    double p_reboot = 0.5;  // chance a user cold-boots vs. using resident DOS
    double p_move = 0.0;    // chance a user changes computer between steps
    std::uint64_t rng_seed = 0;
};

struct StepStats {
    int infected_disk_count = 0;
    int resident_machine_count = 0;
};

struct TraceEntry {
    int step = 0;
    int user = 0;
    int computer = 0;
    int disk = 0;
    bool rebooted = false;
    bool replicated = false;
};

struct SpreadResult {
    std::string rng_kind;  // generator identity, for reproducibility
    std::uint64_t rng_seed = 0;
    int total_disks = 0;
    std::vector<StepStats> per_step;
    std::map<std::string, int> lineage;  // "u<user>.d<disk>" -> serial
    std::vector<TraceEntry> trace;       // filled only when requested
};

struct SpreadSummary {
    double attack_rate = 0.0;
    std::optional<int> time_to_half_infected;  // step index, or never
    std::map<int, int> lineage_histogram;      // serial -> infected disks
};

// Throws InvalidConfig when the config violates its invariants.
void validate(const SpreadConfig& config);

// Deterministic for a fixed seed.  Per step each user possibly moves,
// picks one of their disks, and either cold-boots it (p_reboot) or runs
// one hooked command against whatever DOS is resident on the machine.
SpreadResult run_simulation(const SpreadConfig& config, bool keep_trace = false);

SpreadSummary summarize(const SpreadResult& result);

}  // namespace clonerlab

#endif
