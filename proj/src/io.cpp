#include "magband/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace magband {

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string butterfly_csv(const ButterflyData& data) {
  std::ostringstream out;
  out << "flux_p,flux_q,flux_value,interval_index,lo,hi\n";
  for (const ButterflyRow& row : data.rows) {
    for (std::size_t i = 0; i < row.intervals.size(); ++i) {
      out << row.flux.p << ',' << row.flux.q << ',' << format_real(row.flux.value()) << ',' << i << ','
          << format_real(row.intervals[i].lo) << ',' << format_real(row.intervals[i].hi) << '\n';
    }
  }
  return out.str();
}

std::string gaps_csv(const ButterflyData& data) {
  std::ostringstream out;
  out << "flux_p,flux_q,gap_index,label\n";
  for (const ButterflyRow& row : data.rows) {
    if (!row.labels) continue;
    for (const GapLabel& g : *row.labels) {
      out << row.flux.p << ',' << row.flux.q << ',' << g.gap_index << ',' << g.label << '\n';
    }
  }
  return out.str();
}

namespace {

std::vector<std::vector<std::string>> csv_records(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("csv: expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    const std::size_t expected = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
    if (fields.size() != expected) {
      throw std::runtime_error("csv: line " + std::to_string(lineno) + " has " +
                               std::to_string(fields.size()) + " fields");
    }
    out.push_back(std::move(fields));
  }
  return out;
}

long to_long(const std::string& s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) throw std::runtime_error("csv: bad integer '" + s + "'");
  return v;
}

double to_real(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::runtime_error("csv: bad number '" + s + "'");
  return v;
}

void restore_bands(ButterflyRow& row) {
  for (std::size_t i = 0; i < row.intervals.size(); ++i) {
    row.intervals[i].first_band = static_cast<int>(i);
    row.intervals[i].last_band = static_cast<int>(i);
  }
}

}  // namespace

ButterflyData parse_butterfly_csv(const std::string& intervals, const std::optional<std::string>& gaps) {
  ButterflyData data;
  try {
    for (const auto& f : csv_records(intervals, "flux_p,flux_q,flux_value,interval_index,lo,hi")) {
      const RationalFlux flux{static_cast<int>(to_long(f[0])), static_cast<int>(to_long(f[1]))};
      if (data.rows.empty() || !(data.rows.back().flux == flux)) {
        data.rows.push_back({flux, {}, std::nullopt});
      }
      ButterflyRow& row = data.rows.back();
      if (to_long(f[3]) != static_cast<long>(row.intervals.size())) {
        throw std::runtime_error("csv: interval indices out of order");
      }
      row.intervals.push_back({to_real(f[4]), to_real(f[5]), 0, 0});
    }
    for (ButterflyRow& row : data.rows) restore_bands(row);
    if (gaps) {
      for (ButterflyRow& row : data.rows) row.labels.emplace();
      for (const auto& f : csv_records(*gaps, "flux_p,flux_q,gap_index,label")) {
        const RationalFlux flux{static_cast<int>(to_long(f[0])), static_cast<int>(to_long(f[1]))};
        auto row = std::find_if(data.rows.begin(), data.rows.end(), [&](const ButterflyRow& r) { return r.flux == flux; });
        if (row == data.rows.end()) {
          data.rows.push_back({flux, {}, std::vector<GapLabel>{}});
          row = data.rows.end() - 1;
        }
        row->labels->push_back({static_cast<int>(to_long(f[2])), static_cast<int>(to_long(f[3]))});
      }
    }
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("csv: unparsable field (") + e.what() + ")");
  } catch (const std::out_of_range& e) {
    throw std::runtime_error(std::string("csv: field out of range (") + e.what() + ")");
  }
  return data;
}

namespace {

// Rounds to the 12 significant digits used by every output format.
double json_real(double x) { return std::stod(format_real(x)); }

}  // namespace

std::string butterfly_json(const ButterflyData& data) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ButterflyRow& row : data.rows) {
    nlohmann::ordered_json r;
    r["flux_p"] = row.flux.p;
    r["flux_q"] = row.flux.q;
    r["flux_value"] = json_real(row.flux.value());
    nlohmann::ordered_json ivs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < row.intervals.size(); ++i) {
      const Interval& iv = row.intervals[i];
      ivs.push_back({{"interval_index", i},
                     {"lo", json_real(iv.lo)},
                     {"hi", json_real(iv.hi)},
                     {"first_band", iv.first_band},
                     {"last_band", iv.last_band}});
    }
    r["intervals"] = std::move(ivs);
    if (row.labels) {
      nlohmann::ordered_json labels = nlohmann::ordered_json::array();
      for (const GapLabel& g : *row.labels) labels.push_back({{"gap_index", g.gap_index}, {"label", g.label}});
      r["labels"] = std::move(labels);
    }
    rows.push_back(std::move(r));
  }
  nlohmann::ordered_json doc;
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

ButterflyData parse_butterfly_json(const std::string& text) {
  ButterflyData data;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    for (const auto& r : doc.at("rows")) {
      ButterflyRow row;
      row.flux = {r.at("flux_p").get<int>(), r.at("flux_q").get<int>()};
      for (const auto& iv : r.at("intervals")) {
        row.intervals.push_back({iv.at("lo").get<double>(), iv.at("hi").get<double>(),
                                 iv.at("first_band").get<int>(), iv.at("last_band").get<int>()});
      }
      if (r.contains("labels")) {
        row.labels.emplace();
        for (const auto& g : r.at("labels")) row.labels->push_back({g.at("gap_index").get<int>(), g.at("label").get<int>()});
      }
      data.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("json: ") + e.what());
  }
  return data;
}

bool same_content(const ButterflyData& a, const ButterflyData& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ButterflyRow& x = a.rows[i];
    const ButterflyRow& y = b.rows[i];
    if (!(x.flux == y.flux) || x.intervals.size() != y.intervals.size()) return false;
    for (std::size_t k = 0; k < x.intervals.size(); ++k) {
      if (x.intervals[k].lo != y.intervals[k].lo || x.intervals[k].hi != y.intervals[k].hi) return false;
    }
    if (x.labels.has_value() != y.labels.has_value()) return false;
    if (x.labels) {
      if (x.labels->size() != y.labels->size()) return false;
      for (std::size_t k = 0; k < x.labels->size(); ++k) {
        if ((*x.labels)[k].gap_index != (*y.labels)[k].gap_index || (*x.labels)[k].label != (*y.labels)[k].label) {
          return false;
        }
      }
    }
  }
  return true;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Rgb label_color(int label) {
  if (label == 0) return {255, 255, 255};
  const double f = std::min(1.0, (std::abs(label) - 1) / 8.0);
  const auto c = [](double v) { return static_cast<int>(std::lround(v)); };
  if (label > 0) return {c(220 + 35 * f), c(30 + 170 * f), 30};
  return {30, c(60 + 160 * f), c(220 + 35 * f)};
}

std::string render_svg(const ButterflyData& data, const SvgOptions& options) {
  const double margin = 40.0;
  const double w = options.width;
  const double h = options.height;
  const double pw = w - 2 * margin;
  const double ph = h - 2 * margin;
  const auto x_of = [&](double e) { return margin + (std::clamp(e, -4.0, 4.0) + 4.0) / 8.0 * pw; };
  const auto y_of = [&](double flux) { return margin + (1.0 - flux) * ph; };
  const double bar = std::max(1.0, std::min(6.0, 0.6 * ph / std::max<std::size_t>(1, data.rows.size())));

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' ' << options.height
      << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"#ffffff\"/>\n"
      << "<g stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n"
      << "<rect x=\"" << format_real(margin) << "\" y=\"" << format_real(margin) << "\" width=\""
      << format_real(pw) << "\" height=\"" << format_real(ph) << "\"/>\n"
      << "</g>\n"
      << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#000000\">\n"
      << "<text x=\"" << format_real(margin) << "\" y=\"" << format_real(h - 12) << "\">-4</text>\n"
      << "<text x=\"" << format_real(margin + pw - 8) << "\" y=\"" << format_real(h - 12) << "\">4</text>\n"
      << "<text x=\"" << format_real(margin + pw / 2 - 20) << "\" y=\"" << format_real(h - 12)
      << "\">energy</text>\n"
      << "<text x=\"8\" y=\"" << format_real(margin + ph) << "\">0</text>\n"
      << "<text x=\"8\" y=\"" << format_real(margin + 10) << "\">1</text>\n"
      << "<text x=\"4\" y=\"" << format_real(margin + ph / 2) << "\">flux</text>\n"
      << "</g>\n";

  if (options.color) {
    out << "<g stroke=\"none\">\n";
    for (const ButterflyRow& row : data.rows) {
      if (!row.labels) continue;
      for (const GapLabel& g : *row.labels) {
        const auto below = std::find_if(row.intervals.begin(), row.intervals.end(),
                                        [&](const Interval& iv) { return iv.last_band + 1 == g.gap_index; });
        if (below == row.intervals.end() || below + 1 == row.intervals.end()) continue;
        // gaps are colored by the Chern sum of the bands above them, which is
        // -label for a family of total Chern number 0
        const Rgb c = label_color(-g.label);
        const double x0 = x_of(below->hi);
        const double x1 = x_of((below + 1)->lo);
        out << "<rect x=\"" << format_real(x0) << "\" y=\"" << format_real(y_of(row.flux.value()) - bar / 2)
            << "\" width=\"" << format_real(std::max(0.0, x1 - x0)) << "\" height=\"" << format_real(bar)
            << "\" fill=\"rgb(" << c.r << ',' << c.g << ',' << c.b << ")\"/>\n";
      }
    }
    out << "</g>\n";
  }

  out << "<g stroke=\"none\" fill=\"#000000\">\n";
  for (const ButterflyRow& row : data.rows) {
    for (const Interval& iv : row.intervals) {
      const double x0 = x_of(iv.lo);
      const double x1 = x_of(iv.hi);
      out << "<rect x=\"" << format_real(x0) << "\" y=\"" << format_real(y_of(row.flux.value()) - bar / 2)
          << "\" width=\"" << format_real(std::max(0.5, x1 - x0)) << "\" height=\"" << format_real(bar)
          << "\"/>\n";
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace magband
