#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace
{

const fs::path kTool = WGMSIM_PATH;
const fs::path kConfigs = WGM_CONFIG_DIR;

fs::path scratch(const std::string &name)
{
    const fs::path dir = fs::temp_directory_path() / ("wgmsim_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int wgmsim(const std::string &args)
{
    const std::string command = kTool.string() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write(const fs::path &path, const std::string &text)
{
    std::ofstream(path, std::ios::binary) << text;
}

} // namespace

TEST_CASE("simulate, fit and metrics succeed on the example configuration")
{
    const fs::path dir = scratch("ok");
    CHECK(wgmsim("simulate --config " + (kConfigs / "m1.json").string() + " --ports drop --out " +
                 (dir / "sim").string()) == 0);
    CHECK(fs::exists(dir / "sim" / "spectra.csv"));
    CHECK(fs::exists(dir / "sim" / "manifest.json"));

    // Normalized drop trace of the simulation as fit input.
    CHECK(wgmsim("simulate --scenario fig2a --out " + (dir / "fig2a").string()) == 0);
    write(dir / "init.json", R"({"background": {"offset": 0.05}, "co_fit_background": true, "linewidth_MHz": 120})");
    CHECK(wgmsim("fit --data " + (dir / "sim" / "spectra.csv").string() + " --init " + (dir / "init.json").string() +
                 " --port drop --out " + (dir / "fit").string()) == 0);
    const auto fit = nlohmann::json::parse(read(dir / "fit" / "fit.json"));
    CHECK(fit.at("parameters").contains("linewidth_MHz"));
    CHECK(fit.at("converged") == true);

    CHECK(wgmsim("metrics --from " + (dir / "fit" / "fit.json").string() + " --out " + (dir / "m1").string()) == 0);
    CHECK(wgmsim("metrics --from " + (kConfigs / "m1.json").string() + " --out " + (dir / "m2").string()) == 0);
    const auto metrics = nlohmann::json::parse(read(dir / "m2" / "metrics.json"));
    CHECK(metrics.contains("purcell_factor"));

    CHECK(wgmsim("compare --simulated " + (dir / "fig2a" / "spectra.csv").string() + " --reference " +
                 (dir / "fig2a" / "spectra.csv").string() + " --out " + (dir / "cmp").string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("simulate output is identical for any worker count")
{
    const fs::path dir = scratch("workers");
    for (const char *scenario : {"fig2d", "fig3a"})
    {
        CHECK(wgmsim(std::string("simulate --scenario ") + scenario + " --workers 1 --out " + (dir / "a").string()) ==
              0);
        CHECK(wgmsim(std::string("simulate --scenario ") + scenario + " --workers 6 --out " + (dir / "b").string()) ==
              0);
        for (const auto &entry : fs::directory_iterator(dir / "a"))
        {
            if (entry.path().filename() != "manifest.json")
            {
                CHECK(read(entry.path()) == read(dir / "b" / entry.path().filename()));
            }
        }
        const auto ma = nlohmann::json::parse(read(dir / "a" / "manifest.json"));
        const auto mb = nlohmann::json::parse(read(dir / "b" / "manifest.json"));
        CHECK(ma.at("outputs") == mb.at("outputs"));
    }
    fs::remove_all(dir);
}

TEST_CASE("validation problems exit with code 2")
{
    const fs::path dir = scratch("validation");
    write(dir / "bad.json", R"({"mode_pairs": [{"label": "fundamental", "center_frequency_THz": 404.935,
        "linewidth_GHz": 27.0, "intrinsic_loss_GHz": 1.0, "external_coupling_GHz": [3.0, 3.0]}],
        "emitters": [], "drive": {"detuning_GHz": [-1.0, 0.0, 1.0]}})");
    CHECK(wgmsim("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()) == 2);
    write(dir / "broken.json", "{\"mode_pairs\": [");
    CHECK(wgmsim("simulate --config " + (dir / "broken.json").string() + " --out " + (dir / "o").string()) == 2);
    CHECK(wgmsim("simulate --scenario nope --out " + (dir / "o").string()) == 2);
    CHECK(wgmsim("simulate --scenario fig2a --ports '' --out " + (dir / "o").string()) == 2);
    CHECK(wgmsim("simulate --scenario fig2a --ports sideways --out " + (dir / "o").string()) == 2);
    CHECK(wgmsim("simulate --scenario fig2a") == 2);
    CHECK(wgmsim("frobnicate") == 2);
    fs::remove_all(dir);
}

TEST_CASE("a fit that does not converge exits with code 3")
{
    const fs::path dir = scratch("fit");
    CHECK(wgmsim("simulate --scenario fig2a --ports drop --out " + (dir / "sim").string()) == 0);
    write(dir / "init.json", R"({"max_iterations": 1, "linewidth_MHz": 400, "center_GHz": 0.3})");
    CHECK(wgmsim("fit --data " + (dir / "sim" / "spectra.csv").string() + " --init " + (dir / "init.json").string() +
                 " --out " + (dir / "fit").string()) == 3);
    fs::remove_all(dir);
}

TEST_CASE("unwritable output exits with code 4")
{
    const fs::path dir = scratch("io");
    write(dir / "file", "x");
    CHECK(wgmsim("simulate --scenario fig1c --out " + (dir / "file" / "sub").string()) == 4);
    fs::remove_all(dir);
}

TEST_CASE("failed comparison exits with code 2")
{
    const fs::path dir = scratch("compare");
    CHECK(wgmsim("simulate --scenario fig2a --ports drop --out " + (dir / "a").string()) == 0);
    CHECK(wgmsim("simulate --scenario fig2b --ports drop --out " + (dir / "b").string()) == 0);
    CHECK(wgmsim("compare --simulated " + (dir / "a" / "spectra.csv").string() + " --reference " +
                 (dir / "b" / "spectra.csv").string() + " --max-deviation 0.001 --out " + (dir / "cmp").string()) == 2);
    const auto report = nlohmann::json::parse(read(dir / "cmp" / "comparison.json"));
    CHECK(report.at("pass") == false);
    fs::remove_all(dir);
}
