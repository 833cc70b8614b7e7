#ifndef WGM_SCENARIO_HPP
#define WGM_SCENARIO_HPP

#include "wgm/model.hpp"
#include "wgm/solver.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wgm
{

inline constexpr const char *kToolName = "wgmsim";
inline constexpr const char *kToolVersion = "1.0.0";

enum class SweepAxis
{
    laser_frequency,
    cavity_detuning,
    stark_voltage,
};

struct Scenario
{
    std::string name = "custom";
    // Base model; presets fall back to their reference device when empty.
    std::optional<SystemModel> model;
    std::string config_text; // hashed into the manifest when present
    std::vector<Port> ports{Port::drop, Port::add, Port::transmission};
    std::size_t workers = 0;
};

struct OutputFile
{
    std::string name;
    std::string content;
};

struct ScenarioBundle
{
    std::string scenario;
    SweepAxis axis = SweepAxis::laser_frequency;
    std::vector<OutputFile> files; // data files in emission order
    nlohmann::json manifest;

    const OutputFile *find(const std::string &name) const;
};

std::vector<std::string> preset_names();
bool is_preset(const std::string &name);
std::string_view to_string(SweepAxis axis);

// Runs a preset or custom scenario in memory. Every data file is a pure
// function of the scenario; only the manifest timings vary between runs.
ScenarioBundle run_scenario(const Scenario &scenario);

// Writes the data files and manifest.json into the directory.
void write_bundle(const ScenarioBundle &bundle, const std::filesystem::path &directory);

} // namespace wgm

#endif
