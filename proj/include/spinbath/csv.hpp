// csv.hpp — deterministic text serialization.
//
// Every floating-point value is written with 17 significant digits
// (%.17g), enough to round-trip a double exactly, so identical runs
// produce byte-identical files.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spinbath/analysis.hpp"
#include "spinbath/dynamics.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/format.hpp"

namespace spinbath {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: LF on every platform
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

// One CSV line from already-formatted cells.
inline std::string join_csv(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) line += ',';
    line += cells[k];
  }
  line += '\n';
  return line;
}

// Coherence trace: t, Re C, Im C, |C| per sample.
inline void write_trace_csv(const CoherenceTrace& trace,
                            const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  out << "t,re_C,im_C,abs_C\n";
  for (Eigen::Index k = 0; k < trace.times.size(); ++k)
    out << fmt17(trace.times[k]) << ',' << fmt17(trace.values[k].real()) << ','
        << fmt17(trace.values[k].imag()) << ','
        << fmt17(std::abs(trace.values[k])) << '\n';
  if (!out) throw IoError("short write: " + path.string());
}

// Metadata lines are '#'-prefixed key = value pairs ahead of the header.
inline void write_metadata(std::ofstream& out,
                           const std::vector<std::pair<std::string, std::string>>& meta) {
  for (const auto& [key, value] : meta) out << "# " << key << " = " << value << '\n';
}

// Overlap spectrum: level index, energy, overlap, with metadata header.
inline void write_overlap_csv(
    const OverlapReport& report, const Eigen::VectorXd& energies,
    const std::vector<std::pair<std::string, std::string>>& meta,
    const std::filesystem::path& path) {
  if (report.overlaps.size() != energies.size())
    throw ArgumentError("write_overlap_csv: dimension mismatch");
  std::ofstream out = open_for_write(path);
  write_metadata(out, meta);
  out << "level,energy,overlap\n";
  for (Eigen::Index n = 0; n < energies.size(); ++n)
    out << n << ',' << fmt17(energies[n]) << ',' << fmt17(report.overlaps[n])
        << '\n';
  if (!out) throw IoError("short write: " + path.string());
}

// Spacing histogram: bin edges and densities, with metadata header.
inline void write_spacing_csv(
    const SpacingHistogram& hist,
    const std::vector<std::pair<std::string, std::string>>& meta,
    const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  write_metadata(out, meta);
  out << "# n_spacings = " << hist.spacings.size() << '\n';
  out << "# sector_mode = "
      << (hist.sectored ? "magnetization-sectored" : "whole-spectrum") << '\n';
  out << "# ks_wigner = " << fmt17(hist.ks_wigner) << '\n';
  out << "# ks_poisson = " << fmt17(hist.ks_poisson) << '\n';
  out << "bin_left,bin_right,density\n";
  for (std::size_t b = 0; b + 1 < hist.bin_edges.size(); ++b)
    out << fmt17(hist.bin_edges[b]) << ',' << fmt17(hist.bin_edges[b + 1])
        << ',' << fmt17(hist.densities[b]) << '\n';
  if (!out) throw IoError("short write: " + path.string());
}

}  // namespace spinbath
