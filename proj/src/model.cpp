#include "wgm/model.hpp"

#include "wgm/errors.hpp"
#include "wgm/units.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace wgm
{
namespace
{

using nlohmann::json;

constexpr double kClosureTolerance = 1e-9;
constexpr double kSecondOrderWidthFactor = 10.0;
constexpr double kSecondOrderCouplingFactor = 0.5;
constexpr double kSecondOrderOffsetGhz = 30.0;

// Reads one JSON object, tracking which keys were consumed so that
// leftovers can be rejected with their full path.
class ObjectReader
{
public:
    ObjectReader(const json &object, std::string path) : object_(object), path_(std::move(path))
    {
        if (!object_.is_object())
        {
            throw ParseError(path_, "expected an object");
        }
    }

    std::string field_path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string &key) const { return object_.contains(key); }

    const json &raw(const std::string &key)
    {
        used_.insert(key);
        return object_.at(key);
    }

    double number(const std::string &key)
    {
        if (!has(key))
        {
            throw ParseError(field_path(key), "required field missing");
        }
        return as_number(raw(key), field_path(key));
    }

    double number_or(const std::string &key, double fallback) { return has(key) ? number(key) : fallback; }

    std::optional<double> optional_number(const std::string &key)
    {
        if (!has(key))
        {
            return std::nullopt;
        }
        return number(key);
    }

    std::vector<double> numbers(const std::string &key)
    {
        const json &value = raw(key);
        if (!value.is_array())
        {
            throw ParseError(field_path(key), "expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < value.size(); ++i)
        {
            out.push_back(as_number(value[i], field_path(key) + "[" + std::to_string(i) + "]"));
        }
        return out;
    }

    std::string text_or(const std::string &key, const std::string &fallback)
    {
        if (!has(key))
        {
            return fallback;
        }
        const json &value = raw(key);
        if (!value.is_string())
        {
            throw ParseError(field_path(key), "expected a string");
        }
        return value.get<std::string>();
    }

    void finish() const
    {
        for (const auto &item : object_.items())
        {
            if (!used_.count(item.key()))
            {
                throw ParseError(field_path(item.key()), "unknown key");
            }
        }
    }

    static double as_number(const json &value, const std::string &path)
    {
        if (!value.is_number())
        {
            throw ParseError(path, "expected a number");
        }
        const double v = value.get<double>();
        if (!std::isfinite(v))
        {
            throw ParseError(path, "expected a finite number");
        }
        return v;
    }

private:
    const json &object_;
    std::string path_;
    std::set<std::string> used_;
};

ModeLabel parse_label(const std::string &text, const std::string &path)
{
    if (text == "fundamental")
    {
        return ModeLabel::fundamental;
    }
    if (text == "second-order")
    {
        return ModeLabel::second_order;
    }
    throw ParseError(path, "label must be \"fundamental\" or \"second-order\"");
}

Direction parse_direction(const std::string &text, const std::string &path)
{
    if (text == "cw")
    {
        return Direction::cw;
    }
    if (text == "ccw")
    {
        return Direction::ccw;
    }
    throw ParseError(path, "direction must be \"cw\" or \"ccw\"");
}

int parse_integer(const json &value, const std::string &path)
{
    if (!value.is_number_integer())
    {
        throw ParseError(path, "expected an integer");
    }
    return value.get<int>();
}

struct PendingModePair
{
    ModePair pair;
    bool has_linewidth = false;
    bool has_intrinsic = false;
    bool has_external = false;
    bool has_center = false;
    bool has_order = false;
};

PendingModePair read_mode_pair(const json &node, const std::string &path)
{
    ObjectReader in(node, path);
    PendingModePair pending;
    ModePair &p = pending.pair;
    p.label = parse_label(in.text_or("label", "fundamental"), in.field_path("label"));
    if (in.has("center_frequency_THz"))
    {
        p.center_frequency_thz = in.number("center_frequency_THz");
        pending.has_center = true;
    }
    if (in.has("linewidth_GHz"))
    {
        p.linewidth_ghz = in.number("linewidth_GHz");
        pending.has_linewidth = true;
    }
    if (in.has("intrinsic_loss_GHz"))
    {
        p.intrinsic_loss_ghz = in.number("intrinsic_loss_GHz");
        pending.has_intrinsic = true;
    }
    if (in.has("external_coupling_GHz"))
    {
        const auto ext = in.numbers("external_coupling_GHz");
        if (ext.size() != 2)
        {
            throw ParseError(in.field_path("external_coupling_GHz"), "expected one value per waveguide (2)");
        }
        p.external_coupling_ghz = {ext[0], ext[1]};
        pending.has_external = true;
    }
    p.backscatter_ghz = in.number_or("backscatter_GHz", 0.0);
    if (in.has("azimuthal_order"))
    {
        p.azimuthal_order = parse_integer(in.raw("azimuthal_order"), in.field_path("azimuthal_order"));
        pending.has_order = true;
    }
    p.free_spectral_range_thz = in.number_or("free_spectral_range_THz", 0.0);
    in.finish();
    return pending;
}

// Returns the field path of the first azimuthal order left unset, or an empty string.
std::string resolve_mode_pairs(std::vector<PendingModePair> &pending, const std::string &path)
{
    std::string missing_order;
    const PendingModePair *fundamental = nullptr;
    for (const auto &p : pending)
    {
        if (p.pair.label == ModeLabel::fundamental)
        {
            fundamental = &p;
            break;
        }
    }
    for (std::size_t i = 0; i < pending.size(); ++i)
    {
        auto &p = pending[i];
        const std::string where = path + "[" + std::to_string(i) + "]";
        const bool derive = p.pair.label == ModeLabel::second_order && fundamental != nullptr;
        if (!p.has_center)
        {
            if (!derive)
            {
                throw ParseError(where + ".center_frequency_THz", "required field missing");
            }
            p.pair.center_frequency_thz =
                fundamental->pair.center_frequency_thz + units::ghz_to_thz(kSecondOrderOffsetGhz);
        }
        if (!p.has_linewidth)
        {
            if (!derive)
            {
                throw ParseError(where + ".linewidth_GHz", "required field missing");
            }
            p.pair.linewidth_ghz = kSecondOrderWidthFactor * fundamental->pair.linewidth_ghz;
        }
        if (!p.has_external)
        {
            if (!derive)
            {
                throw ParseError(where + ".external_coupling_GHz", "required field missing");
            }
            p.pair.external_coupling_ghz = fundamental->pair.external_coupling_ghz;
        }
        if (!p.has_order)
        {
            if (derive && fundamental->has_order)
            {
                p.pair.azimuthal_order = fundamental->pair.azimuthal_order;
            }
            else if (missing_order.empty())
            {
                missing_order = where + ".azimuthal_order";
            }
        }
        if (!p.has_intrinsic)
        {
            p.pair.intrinsic_loss_ghz = p.pair.linewidth_ghz - p.pair.total_external_ghz();
        }
    }
    return missing_order;
}

Emitter read_emitter(const json &node, const std::string &path, const std::vector<ModePair> &pairs,
                     std::size_t fundamental, const std::string &missing_order)
{
    ObjectReader in(node, path);
    // The azimuthal order only enters through positions or phases shared across pairs.
    const auto require_order = [&]() {
        if (!missing_order.empty())
        {
            throw ParseError(missing_order, "required when emitters are placed by azimuth");
        }
    };
    if (in.has("azimuth_rad"))
    {
        require_order();
    }
    Emitter e;
    e.name = in.text_or("name", "");
    e.transition_frequency_thz = in.number("transition_frequency_THz");
    e.linewidth_mhz = in.number("linewidth_MHz");
    e.branching_ratio = in.number_or("branching_ratio", 1.0);
    e.dephasing_mhz = in.number_or("dephasing_MHz", 0.0);
    e.azimuth_rad = in.number_or("azimuth_rad", 0.0);
    e.stark_mhz_per_volt = in.number_or("stark_MHz_per_V", 0.0);

    const double kappa = pairs[fundamental].linewidth_ghz;
    const int forms = int(in.has("coupling_MHz")) + int(in.has("enhanced_linewidth_MHz")) +
                      int(in.has("coupling_efficiency"));
    if (forms != 1)
    {
        throw ParseError(path, "exactly one of coupling_MHz, enhanced_linewidth_MHz, coupling_efficiency is required");
    }
    std::vector<double> coupling;
    if (in.has("coupling_MHz"))
    {
        coupling = in.numbers("coupling_MHz");
        if (coupling.empty() || coupling.size() > pairs.size())
        {
            throw ParseError(in.field_path("coupling_MHz"), "expected one value per mode pair");
        }
    }
    else if (in.has("enhanced_linewidth_MHz"))
    {
        const double target = in.number("enhanced_linewidth_MHz");
        if (target < e.coherence_linewidth_mhz())
        {
            throw ValidationError(in.field_path("enhanced_linewidth_MHz") +
                                  ": enhanced linewidth must not be below linewidth_MHz + 2 dephasing_MHz");
        }
        coupling = {coupling_for_enhanced_linewidth(target, e.coherence_linewidth_mhz(), kappa)};
    }
    else
    {
        const double beta = in.number("coupling_efficiency");
        if (!(beta >= 0.0 && beta < 1.0))
        {
            throw ValidationError(in.field_path("coupling_efficiency") + ": must lie in [0, 1)");
        }
        coupling = {coupling_for_efficiency(beta, e.coherence_linewidth_mhz(), kappa)};
    }
    // Calibrated or single-valued couplings describe the fundamental pair;
    // remaining pairs default to half of it.
    if (coupling.size() < pairs.size())
    {
        const double g_fund = coupling.front();
        std::vector<double> full(pairs.size(), kSecondOrderCouplingFactor * g_fund);
        full[fundamental] = g_fund;
        coupling = std::move(full);
    }
    e.coupling_mhz = std::move(coupling);

    if (in.has("coupling_phase_rad"))
    {
        auto phases = in.numbers("coupling_phase_rad");
        if (phases.size() == 1 && pairs.size() > 1)
        {
            require_order();
            const double base = phases.front();
            const double m_fund = pairs[fundamental].azimuthal_order;
            phases.assign(pairs.size(), 0.0);
            for (std::size_t p = 0; p < pairs.size(); ++p)
            {
                phases[p] = base * pairs[p].azimuthal_order / m_fund;
            }
        }
        if (phases.size() != pairs.size())
        {
            throw ParseError(in.field_path("coupling_phase_rad"), "expected one value per mode pair");
        }
        e.coupling_phase_rad = std::move(phases);
    }
    in.finish();
    return e;
}

Channel read_channel(const json &node, const std::string &path)
{
    ObjectReader in(node, path);
    Channel c;
    if (!in.has("waveguide"))
    {
        throw ParseError(in.field_path("waveguide"), "required field missing");
    }
    c.waveguide = parse_integer(in.raw("waveguide"), in.field_path("waveguide"));
    c.direction = parse_direction(in.text_or("direction", "cw"), in.field_path("direction"));
    in.finish();
    return c;
}

CircuitTopology read_topology(const json &node, const std::string &path)
{
    ObjectReader in(node, path);
    bool mirrored = false;
    if (in.has("mirrored"))
    {
        const json &flag = in.raw("mirrored");
        if (!flag.is_boolean())
        {
            throw ParseError(in.field_path("mirrored"), "expected a boolean");
        }
        mirrored = flag.get<bool>();
    }
    CircuitTopology t = mirrored ? CircuitTopology::mirrored() : CircuitTopology{};
    t.reference_amplitude = in.number_or("reference_amplitude", t.reference_amplitude);
    t.reference_phase_rad = in.number_or("reference_phase_rad", t.reference_phase_rad);
    if (in.has("ports"))
    {
        ObjectReader ports(in.raw("ports"), in.field_path("ports"));
        const std::pair<const char *, Channel *> slots[] = {
            {"input", &t.input},         {"transmission", &t.transmission}, {"drop", &t.drop},
            {"add", &t.add},             {"interferometer", &t.interferometer},
        };
        for (const auto &[key, slot] : slots)
        {
            if (ports.has(key))
            {
                *slot = read_channel(ports.raw(key), ports.field_path(key));
            }
        }
        ports.finish();
    }
    in.finish();
    return t;
}

DriveSpec read_drive(const json &node, const std::string &path, double default_origin)
{
    ObjectReader in(node, path);
    DriveSpec d;
    d.origin_thz = in.number_or("origin_THz", default_origin);
    const int forms = int(in.has("detuning_GHz")) + int(in.has("laser_frequency_THz"));
    if (forms > 1)
    {
        throw ParseError(path, "give either detuning_GHz or laser_frequency_THz, not both");
    }
    if (in.has("detuning_GHz"))
    {
        const json &grid = in.raw("detuning_GHz");
        if (grid.is_object())
        {
            ObjectReader range(grid, in.field_path("detuning_GHz"));
            const double start = range.number("start");
            const double stop = range.number("stop");
            const json &count = range.raw("points");
            const int points = parse_integer(count, range.field_path("points"));
            range.finish();
            if (points < 1)
            {
                throw ParseError(range.field_path("points"), "must be positive");
            }
            d.detuning_ghz.resize(std::size_t(points));
            for (int i = 0; i < points; ++i)
            {
                d.detuning_ghz[std::size_t(i)] =
                    points == 1 ? start : start + (stop - start) * double(i) / double(points - 1);
            }
        }
        else
        {
            d.detuning_ghz = in.numbers("detuning_GHz");
        }
    }
    else if (in.has("laser_frequency_THz"))
    {
        const json &value = in.raw("laser_frequency_THz");
        std::vector<double> laser;
        if (value.is_array())
        {
            for (std::size_t i = 0; i < value.size(); ++i)
            {
                laser.push_back(ObjectReader::as_number(
                    value[i], in.field_path("laser_frequency_THz") + "[" + std::to_string(i) + "]"));
            }
        }
        else
        {
            laser.push_back(ObjectReader::as_number(value, in.field_path("laser_frequency_THz")));
        }
        for (double f : laser)
        {
            d.detuning_ghz.push_back(units::thz_to_ghz(f - d.origin_thz));
        }
    }
    in.finish();
    return d;
}

json channel_json(const Channel &c)
{
    return json{{"waveguide", c.waveguide}, {"direction", std::string(to_string(c.direction))}};
}

bool is_rate(double v) { return std::isfinite(v) && v >= 0.0; }

} // namespace

double DriveSpec::laser_frequency_thz(std::size_t i) const
{
    return origin_thz + units::ghz_to_thz(detuning_ghz.at(i));
}

CircuitTopology CircuitTopology::mirrored()
{
    CircuitTopology t;
    for (Channel *c : {&t.input, &t.transmission, &t.drop, &t.add, &t.interferometer})
    {
        c->direction = opposite(c->direction);
    }
    return t;
}

std::size_t SystemModel::fundamental_index() const
{
    for (std::size_t p = 0; p < mode_pairs.size(); ++p)
    {
        if (mode_pairs[p].label == ModeLabel::fundamental)
        {
            return p;
        }
    }
    return 0;
}

const ModePair &SystemModel::fundamental() const { return mode_pairs.at(fundamental_index()); }

double SystemModel::coupling_phase(std::size_t emitter, std::size_t pair) const
{
    const Emitter &e = emitters.at(emitter);
    if (!e.coupling_phase_rad.empty())
    {
        return e.coupling_phase_rad.at(pair);
    }
    return mode_pairs.at(pair).azimuthal_order * e.azimuth_rad;
}

void validate(const SystemModel &model)
{
    if (model.mode_pairs.empty() || model.mode_pairs.size() > 2)
    {
        throw ValidationError("mode_pairs: expected 1 or 2 mode pairs");
    }
    int fundamentals = 0;
    for (std::size_t p = 0; p < model.mode_pairs.size(); ++p)
    {
        const ModePair &m = model.mode_pairs[p];
        const std::string where = "mode_pairs[" + std::to_string(p) + "]";
        fundamentals += m.label == ModeLabel::fundamental ? 1 : 0;
        if (!(std::isfinite(m.center_frequency_thz) && m.center_frequency_thz > 0.0))
        {
            throw ValidationError(where + ": center frequency must be positive");
        }
        if (!is_rate(m.linewidth_ghz) || !is_rate(m.intrinsic_loss_ghz) || !is_rate(m.external_coupling_ghz[0]) ||
            !is_rate(m.external_coupling_ghz[1]) || !is_rate(m.backscatter_ghz))
        {
            throw ValidationError(where + ": all rates must be finite and non-negative");
        }
        const double closure = m.intrinsic_loss_ghz + m.total_external_ghz();
        if (std::abs(m.linewidth_ghz - closure) > kClosureTolerance * std::max(m.linewidth_ghz, closure))
        {
            throw ValidationError(where + ": linewidth must equal intrinsic loss plus external couplings");
        }
        if (m.azimuthal_order <= 0)
        {
            throw ValidationError(where + ": azimuthal order must be a positive integer");
        }
        if (!is_rate(m.free_spectral_range_thz))
        {
            throw ValidationError(where + ": free spectral range must be non-negative");
        }
    }
    if (fundamentals > 1)
    {
        throw ValidationError("mode_pairs: at most one mode pair may be labeled fundamental");
    }

    for (std::size_t j = 0; j < model.emitters.size(); ++j)
    {
        const Emitter &e = model.emitters[j];
        const std::string where = "emitters[" + std::to_string(j) + "]";
        if (!(std::isfinite(e.transition_frequency_thz) && e.transition_frequency_thz > 0.0))
        {
            throw ValidationError(where + ": transition frequency must be positive");
        }
        if (!is_rate(e.linewidth_mhz) || !is_rate(e.dephasing_mhz))
        {
            throw ValidationError(where + ": linewidth and dephasing must be non-negative");
        }
        if (!(e.branching_ratio > 0.0 && e.branching_ratio <= 1.0))
        {
            throw ValidationError(where + ": branching ratio must lie in (0, 1]");
        }
        if (e.coupling_mhz.size() != model.mode_pairs.size())
        {
            throw ValidationError(where + ": one coupling per mode pair is required");
        }
        for (double g : e.coupling_mhz)
        {
            if (!is_rate(g))
            {
                throw ValidationError(where + ": couplings must be non-negative");
            }
        }
        if (!(e.azimuth_rad >= 0.0 && e.azimuth_rad < 2.0 * std::numbers::pi))
        {
            throw ValidationError(where + ": azimuth must lie in [0, 2 pi)");
        }
        if (!e.coupling_phase_rad.empty() && e.coupling_phase_rad.size() != model.mode_pairs.size())
        {
            throw ValidationError(where + ": one coupling phase per mode pair is required");
        }
        for (double phase : e.coupling_phase_rad)
        {
            if (!std::isfinite(phase))
            {
                throw ValidationError(where + ": coupling phases must be finite");
            }
        }
        if (!std::isfinite(e.stark_mhz_per_volt))
        {
            throw ValidationError(where + ": Stark coefficient must be finite");
        }
    }

    const CircuitTopology &t = model.topology;
    if (t.input.waveguide != 1 || t.transmission.waveguide != 1 || t.interferometer.waveguide != 1)
    {
        throw ValidationError("topology: input, transmission and interferometer ports belong to waveguide 1");
    }
    if (t.drop.waveguide != 2 || t.add.waveguide != 2)
    {
        throw ValidationError("topology: drop and add ports belong to waveguide 2");
    }
    const Direction forward = t.input.direction;
    if (t.transmission.direction != forward || t.drop.direction != forward || t.add.direction != opposite(forward) ||
        t.interferometer.direction != opposite(forward))
    {
        throw ValidationError("topology: port directions are inconsistent with the input direction");
    }
    if (!(std::isfinite(t.reference_amplitude) && t.reference_amplitude >= 0.0) ||
        !std::isfinite(t.reference_phase_rad))
    {
        throw ValidationError("topology: reference amplitude must be finite and non-negative");
    }

    const auto &grid = model.drive.detuning_ghz;
    if (!std::isfinite(model.drive.origin_thz) || model.drive.origin_thz <= 0.0)
    {
        throw ValidationError("drive: origin must be a positive frequency");
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        if (!std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1])))
        {
            throw ValidationError("drive: detuning grid must be finite and strictly increasing");
        }
    }
}

SystemModel load_model(const json &document)
{
    ObjectReader in(document, "");
    SystemModel model;

    if (!in.has("mode_pairs"))
    {
        throw ParseError("mode_pairs", "required field missing");
    }
    const json &pairs = in.raw("mode_pairs");
    if (!pairs.is_array())
    {
        throw ParseError("mode_pairs", "expected an array");
    }
    std::vector<PendingModePair> pending;
    for (std::size_t p = 0; p < pairs.size(); ++p)
    {
        pending.push_back(read_mode_pair(pairs[p], "mode_pairs[" + std::to_string(p) + "]"));
    }
    if (pending.empty())
    {
        throw ValidationError("mode_pairs: expected 1 or 2 mode pairs");
    }
    const std::string missing_order = resolve_mode_pairs(pending, "mode_pairs");
    for (auto &p : pending)
    {
        model.mode_pairs.push_back(p.pair);
    }
    const std::size_t fundamental = model.fundamental_index();

    if (in.has("emitters"))
    {
        const json &emitters = in.raw("emitters");
        if (!emitters.is_array())
        {
            throw ParseError("emitters", "expected an array");
        }
        for (std::size_t j = 0; j < emitters.size(); ++j)
        {
            model.emitters.push_back(
                read_emitter(emitters[j], "emitters[" + std::to_string(j) + "]", model.mode_pairs, fundamental, missing_order));
        }
    }
    if (in.has("topology"))
    {
        model.topology = read_topology(in.raw("topology"), "topology");
    }
    const double origin = model.mode_pairs[fundamental].center_frequency_thz;
    if (in.has("drive"))
    {
        model.drive = read_drive(in.raw("drive"), "drive", origin);
    }
    else
    {
        model.drive.origin_thz = origin;
    }
    in.finish();
    validate(model);
    return model;
}

SystemModel load_model_text(std::string_view text)
{
    json document;
    try
    {
        document = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError("", std::string("invalid JSON: ") + e.what());
    }
    return load_model(document);
}

SystemModel load_model_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open config " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_model_text(buffer.str());
}

json save_model(const SystemModel &model)
{
    json pairs = json::array();
    for (const ModePair &m : model.mode_pairs)
    {
        json node{
            {"label", std::string(to_string(m.label))},
            {"center_frequency_THz", m.center_frequency_thz},
            {"linewidth_GHz", m.linewidth_ghz},
            {"intrinsic_loss_GHz", m.intrinsic_loss_ghz},
            {"external_coupling_GHz", json::array({m.external_coupling_ghz[0], m.external_coupling_ghz[1]})},
            {"backscatter_GHz", m.backscatter_ghz},
            {"azimuthal_order", m.azimuthal_order},
        };
        if (m.free_spectral_range_thz > 0.0)
        {
            node["free_spectral_range_THz"] = m.free_spectral_range_thz;
        }
        pairs.push_back(std::move(node));
    }
    json emitters = json::array();
    for (const Emitter &e : model.emitters)
    {
        json node{
            {"name", e.name},
            {"transition_frequency_THz", e.transition_frequency_thz},
            {"linewidth_MHz", e.linewidth_mhz},
            {"branching_ratio", e.branching_ratio},
            {"dephasing_MHz", e.dephasing_mhz},
            {"coupling_MHz", e.coupling_mhz},
            {"azimuth_rad", e.azimuth_rad},
            {"stark_MHz_per_V", e.stark_mhz_per_volt},
        };
        if (!e.coupling_phase_rad.empty())
        {
            node["coupling_phase_rad"] = e.coupling_phase_rad;
        }
        emitters.push_back(std::move(node));
    }
    const CircuitTopology &t = model.topology;
    json topology{
        {"reference_amplitude", t.reference_amplitude},
        {"reference_phase_rad", t.reference_phase_rad},
        {"ports",
         {{"input", channel_json(t.input)},
          {"transmission", channel_json(t.transmission)},
          {"drop", channel_json(t.drop)},
          {"add", channel_json(t.add)},
          {"interferometer", channel_json(t.interferometer)}}},
    };
    json drive{{"origin_THz", model.drive.origin_thz}, {"detuning_GHz", model.drive.detuning_ghz}};
    return json{{"mode_pairs", pairs}, {"emitters", emitters}, {"topology", topology}, {"drive", drive}};
}

void save_model_file(const SystemModel &model, const std::filesystem::path &path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw IoError("cannot write " + path.string());
    }
    out << save_model(model).dump(2) << '\n';
}

SystemModel apply_stark(const SystemModel &model, double voltage)
{
    SystemModel shifted = model;
    for (Emitter &e : shifted.emitters)
    {
        e.transition_frequency_thz += units::ghz_to_thz(units::mhz_to_ghz(e.stark_mhz_per_volt * voltage));
    }
    return shifted;
}

double calibrate_stark(double frequency0_thz, double voltage0, double frequency1_thz, double voltage1)
{
    if (voltage0 == voltage1)
    {
        throw DomainError("calibrate_stark: calibration voltages must differ");
    }
    const double shift_mhz = units::ghz_to_mhz(units::thz_to_ghz(frequency1_thz - frequency0_thz));
    return shift_mhz / (voltage1 - voltage0);
}

ResonatorFigures resonator_figures(double center_frequency_thz, double linewidth_ghz, double fsr_thz)
{
    if (!(center_frequency_thz > 0.0 && linewidth_ghz > 0.0 && fsr_thz > 0.0))
    {
        throw DomainError("resonator_figures: all inputs must be positive");
    }
    ResonatorFigures f;
    f.finesse = units::thz_to_ghz(fsr_thz) / linewidth_ghz;
    f.quality_factor = units::thz_to_ghz(center_frequency_thz) / linewidth_ghz;
    return f;
}

double coupling_for_enhanced_linewidth(double enhanced_linewidth_mhz, double coherence_linewidth_mhz, double kappa_ghz)
{
    const double cavity_part_ghz = units::mhz_to_ghz(enhanced_linewidth_mhz - coherence_linewidth_mhz);
    if (cavity_part_ghz < 0.0 || kappa_ghz <= 0.0)
    {
        throw DomainError("coupling_for_enhanced_linewidth: enhanced linewidth below the bare linewidth");
    }
    return units::ghz_to_mhz(std::sqrt(cavity_part_ghz * kappa_ghz / 8.0));
}

double coupling_for_efficiency(double beta, double coherence_linewidth_mhz, double kappa_ghz)
{
    if (!(beta >= 0.0 && beta < 1.0) || kappa_ghz <= 0.0)
    {
        throw DomainError("coupling_for_efficiency: beta must lie in [0, 1)");
    }
    const double cavity_part_mhz = coherence_linewidth_mhz * beta / (1.0 - beta);
    return coupling_for_enhanced_linewidth(coherence_linewidth_mhz + cavity_part_mhz, coherence_linewidth_mhz,
                                           kappa_ghz);
}

std::string_view to_string(ModeLabel label)
{
    return label == ModeLabel::fundamental ? "fundamental" : "second-order";
}

std::string_view to_string(Direction direction) { return direction == Direction::cw ? "cw" : "ccw"; }

} // namespace wgm
