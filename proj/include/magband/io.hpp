#pragma once

#include <optional>
#include <string>

#include "magband/hofstadter.hpp"

namespace magband {

// %.12g
std::string format_real(double x);

// flux_p,flux_q,flux_value,interval_index,lo,hi
std::string butterfly_csv(const ButterflyData& data);
// flux_p,flux_q,gap_index,label (rows without labels contribute nothing)
std::string gaps_csv(const ButterflyData& data);

// Inverse of butterfly_csv (plus gaps_csv when given, in which case every
// row receives a label list). Band indices are not part of the CSV and are
// restored as consecutive singletons. Throws std::runtime_error on malformed
// input.
ButterflyData parse_butterfly_csv(const std::string& intervals,
                                  const std::optional<std::string>& gaps = std::nullopt);

std::string butterfly_json(const ButterflyData& data);
ButterflyData parse_butterfly_json(const std::string& text);

// Equality of fluxes, interval endpoints and labels.
bool same_content(const ButterflyData& a, const ButterflyData& b);

// Throws std::runtime_error naming the path on failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

struct SvgOptions {
  int width = 800;
  int height = 600;
  bool color = false;
};

struct Rgb {
  int r = 255;
  int g = 255;
  int b = 255;
};

// 0 white, positive labels warm (1 is red), negative labels cool (-1 is blue).
Rgb label_color(int label);

// Standalone SVG 1.1: energy in [-4, 4] horizontally, flux in [0, 1]
// vertically (0 at the bottom), one bar per interval, and with color the
// gaps between consecutive intervals filled by label_color of the Chern sum
// of the bands above the gap (-label).
std::string render_svg(const ButterflyData& data, const SvgOptions& options = {});

}  // namespace magband
