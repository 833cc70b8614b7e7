#ifndef WGM_WATERFALL_HPP
#define WGM_WATERFALL_HPP

#include "wgm/lineshape.hpp"
#include "wgm/spectrum.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace wgm
{

struct WaterfallInit
{
    std::size_t molecules = 1;
    std::vector<double> centers_ghz; // optional starting positions, one per molecule
    double linewidth_ghz = 0.1;      // expected line width; sets windows and the association radius
    double threshold = 0.02;         // minimum |data / background - 1| of a candidate line
    double max_jump_linewidths = 5.0;
    std::size_t workers = 0;
};

struct WaterfallStep
{
    std::vector<std::optional<double>> center_ghz; // nullopt: track lost at this step
    std::vector<bool> merged;                      // shares its line with another track
    std::vector<double> candidates_ghz;
};

struct WaterfallResult
{
    double origin_thz = 0.0;
    std::vector<double> axis; // sweep coordinate of every step (voltage, index, ...)
    std::vector<WaterfallStep> steps;

    std::size_t molecules() const { return steps.empty() ? 0 : steps.front().center_ghz.size(); }
};

// Positions of candidate lines in one spectrum: local extrema of
// |data / background - 1| above the threshold, one per linewidth, each
// refined by a local Fano fit when that fit converges.
std::vector<double> find_line_candidates(const Spectrum &spectrum, const BackgroundModel &background,
                                         double threshold, double linewidth_ghz);

// Follows each molecule through a series of spectra on a shared grid by
// nearest-candidate association around a linear extrapolation of its track.
// A track with no candidate within the jump radius gets a gap; two tracks
// predicted closer than one linewidth that find a single line share it and
// are flagged as merged.
WaterfallResult track_waterfall(const std::vector<Spectrum> &steps, const std::vector<double> &axis,
                                const BackgroundModel &background, const WaterfallInit &init);

struct TrackLine
{
    double slope = 0.0;     // GHz per axis unit
    double intercept = 0.0; // GHz at axis = 0
    std::size_t points = 0;
    double rms_ghz = 0.0;

    double operator()(double x) const { return intercept + slope * x; }
};

// Least-squares line through the resolved (present and unmerged) points of a track.
TrackLine fit_track_line(const WaterfallResult &result, std::size_t molecule);

// Axis value where two fitted tracks meet.
double track_crossing(const TrackLine &a, const TrackLine &b);

} // namespace wgm

#endif
