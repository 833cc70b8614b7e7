#ifndef WGM_UNITS_HPP
#define WGM_UNITS_HPP

// Every rate is stored as an ordinary frequency: a physical rate of 2*pi*X GHz
// is stored as X. Absolute frequencies are THz, cavity rates and detunings GHz,
// emitter rates and couplings MHz. Computations run in GHz.
namespace wgm::units
{

inline constexpr double ghz_per_thz = 1e3;
inline constexpr double mhz_per_ghz = 1e3;

constexpr double thz_to_ghz(double thz) { return thz * ghz_per_thz; }
constexpr double ghz_to_thz(double ghz) { return ghz / ghz_per_thz; }
constexpr double mhz_to_ghz(double mhz) { return mhz / mhz_per_ghz; }
constexpr double ghz_to_mhz(double ghz) { return ghz * mhz_per_ghz; }

} // namespace wgm::units

#endif
