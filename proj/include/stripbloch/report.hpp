#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stripbloch/dynamics.hpp"
#include "stripbloch/spectrum.hpp"

namespace stripbloch {

// Every table renders reals with %.12g so identical runs are byte-identical.
std::string format_g12(double x);

// bands.csv: k,band_index,E,dE_dk,embedded,sigma_min,residual,multiplicity,
// one row per certified sample.
std::string bands_csv(const std::vector<EigenCurve>& curves);

// singular_points.csv: k,band_index,reason with reason in
// {threshold, lost, crossing}.
std::string singular_points_csv(const std::vector<EigenCurve>& curves);

// gnuplot mirror of bands.csv: k E dE_dk, one block per band separated by a
// blank line.
std::string bands_dat(const std::vector<EigenCurve>& curves);

// transport.csv: t,mean_X,mean_Y,var_X,var_Y,norm,boundary_mass plus one
// chi_mass_v<v> column per recorded escape velocity.
std::string transport_csv(const TimeSeries& series);

// gnuplot mirror of transport.csv (same columns, whitespace separated).
std::string transport_dat(const TimeSeries& series);

// FNV-1a 64-bit content digest, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

// Creates parent directories as needed; failures surface as IoError.
void write_text(const std::filesystem::path& path, const std::string& body);

std::string read_text(const std::filesystem::path& path);

}  // namespace stripbloch
