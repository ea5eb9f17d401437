#include "clonerlab/spread_sim.hpp"

#include <random>
#include <set>

#include "clonerlab/boot_sim.hpp"
#include "clonerlab/cloner_core.hpp"
#include "clonerlab/fixtures.hpp"

namespace clonerlab {

namespace {

// All randomness comes from raw mt19937_64 draws so a seed fully determines
// a run: probabilities via the top 53 bits, bounded values via modulo.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    bool chance(double p) { return double(gen_() >> 11) * 0x1.0p-53 < p; }
    int below(int n) { return int(gen_() % std::uint64_t(n)); }

private:
    std::mt19937_64 gen_;
};

std::string disk_key(int user, int disk)
{
    return "u" + std::to_string(user) + ".d" + std::to_string(disk);
}

}  // namespace

void validate(const SpreadConfig& config)
{
    auto fail = [](const std::string& what) {
        throw Error(ErrorCode::InvalidConfig, what);
    };
    if (config.num_computers < 1)
        fail("num_computers must be positive");
    if (config.num_users < 1)
        fail("num_users must be positive");
    if (config.disks_per_user < 1)
        fail("disks_per_user must be positive");
    if (config.steps < 1)
        fail("steps must be positive");
    if (config.p_reboot < 0.0 || config.p_reboot > 1.0)
        fail("p_reboot must be in [0,1]");
    if (config.p_move < 0.0 || config.p_move > 1.0)
        fail("p_move must be in [0,1]");
    std::set<std::pair<int, int>> seen;
    for (const auto& seed : config.initial_infections) {
        if (seed.user < 0 || seed.user >= config.num_users)
            fail("initial infection references user " + std::to_string(seed.user));
        if (seed.disk < 0 || seed.disk >= config.disks_per_user)
            fail("initial infection references disk " + std::to_string(seed.disk));
        if (!seen.insert({seed.user, seed.disk}).second)
            fail("duplicate initial infection " + disk_key(seed.user, seed.disk));
    }
}

SpreadResult run_simulation(const SpreadConfig& config, bool keep_trace)
{
    validate(config);

    std::vector<std::vector<DiskImage>> disks(std::size_t(config.num_users));
    for (auto& user_disks : disks) {
        user_disks.reserve(std::size_t(config.disks_per_user));
        for (int d = 0; d < config.disks_per_user; ++d)
            user_disks.push_back(fixtures::make_dos33_slave());
    }
    for (const auto& seed : config.initial_infections)
        disks[std::size_t(seed.user)][std::size_t(seed.disk)] =
            infect(disks[std::size_t(seed.user)][std::size_t(seed.disk)], seed.serial).image;

    std::vector<MachineState> machines(std::size_t(config.num_computers));
    std::vector<int> user_at(std::size_t(config.num_users));
    for (int u = 0; u < config.num_users; ++u)
        user_at[std::size_t(u)] = u % config.num_computers;

    SpreadResult result;
    result.rng_kind = "std::mt19937_64";
    result.rng_seed = config.rng_seed;
    result.total_disks = config.num_users * config.disks_per_user;
    result.per_step.reserve(std::size_t(config.steps));

    Rng rng(config.rng_seed);

    for (int step = 1; step <= config.steps; ++step) {
        for (int u = 0; u < config.num_users; ++u) {
            if (rng.chance(config.p_move))
                user_at[std::size_t(u)] = rng.below(config.num_computers);
            int d = rng.below(config.disks_per_user);
            MachineState& machine = machines[std::size_t(user_at[std::size_t(u)])];

            // The user brings their disk to the machine and takes it away after.
            machine.inserted_disk = std::move(disks[std::size_t(u)][std::size_t(d)]);

            bool rebooted = rng.chance(config.p_reboot);
            bool replicated = false;
            if (rebooted) {
                boot(machine);
            } else {
                static const Command kHooked[] = {Command::Load, Command::Bload,
                                                  Command::Catalog};
                CommandInvocation invocation{kHooked[rng.below(3)], {}};
                try {
                    CommandResult r = run_command(machine, invocation);
                    for (const auto& e : r.events)
                        replicated |= e.kind == EventKind::Replicated;
                } catch (const Error&) {
                    // nothing resident on this machine yet; the command is lost
                }
            }

            disks[std::size_t(u)][std::size_t(d)] = std::move(*machine.inserted_disk);
            machine.inserted_disk.reset();

            if (keep_trace)
                result.trace.push_back(
                    {step, u, user_at[std::size_t(u)], d, rebooted, replicated});
        }

        StepStats stats;
        for (const auto& user_disks : disks)
            for (const auto& disk : user_disks)
                if (detect(disk).verdict == Verdict::Infected)
                    ++stats.infected_disk_count;
        for (const auto& machine : machines)
            if (machine.cloner_resident)
                ++stats.resident_machine_count;
        result.per_step.push_back(stats);
    }

    for (int u = 0; u < config.num_users; ++u)
        for (int d = 0; d < config.disks_per_user; ++d) {
            const DiskImage& disk = disks[std::size_t(u)][std::size_t(d)];
            if (detect(disk).verdict == Verdict::Infected)
                result.lineage[disk_key(u, d)] = parse_vtoc(disk).cloner_serial;
        }

    return result;
}

SpreadSummary summarize(const SpreadResult& result)
{
    SpreadSummary summary;
    int infected = result.per_step.empty() ? int(result.lineage.size())
                                           : result.per_step.back().infected_disk_count;
    if (result.total_disks > 0)
        summary.attack_rate = double(infected) / double(result.total_disks);
    for (std::size_t i = 0; i < result.per_step.size(); ++i) {
        if (result.per_step[i].infected_disk_count * 2 >= result.total_disks) {
            summary.time_to_half_infected = int(i) + 1;
            break;
        }
    }
    for (const auto& [key, serial] : result.lineage)
        ++summary.lineage_histogram[serial];
    return summary;
}

}  // namespace clonerlab
