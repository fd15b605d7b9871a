#pragma once

#include "optocorr/spectra.hpp"

#include <iosfwd>
#include <string>

namespace optocorr {

// Tabular spectrum files:
//   # norm=shot_noise_units
//   # theta_rad=0.5
//   # rbw_hz=1000
//   freq_hz,psd
//   3.39e6,1.02
// Frequencies in Hz. Physical PSDs are single-sided per Hz (twice the internal
// two-sided density); shot-noise-normalized spectra are stored unscaled.
// Separators: comma, tab or spaces.
Spectrum read_spectrum(const std::string& path);
Spectrum read_spectrum(std::istream& in);
void write_spectrum(const Spectrum& spec, const std::string& path);
void write_spectrum(const Spectrum& spec, std::ostream& out);

/// Conversion between the internal and file conventions for one value.
double psd_to_file(SpectrumNorm n, double internal);
double psd_from_file(SpectrumNorm n, double stored);

} // namespace optocorr
