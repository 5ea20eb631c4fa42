#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hypfill/common.hpp"
#include "hypfill/filling.hpp"
#include "hypfill/interp.hpp"
#include "hypfill/norms.hpp"
#include "hypfill/space.hpp"

namespace hypfill {

using json = nlohmann::json;

enum class FileFormat { csv, json };

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool parse_number(const std::string& tok, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    return pos == tok.size();
  } catch (...) {
    return false;
  }
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& t : out) {
    const auto a = t.find_first_not_of(" \t");
    const auto b = t.find_last_not_of(" \t");
    t = a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Norm parameter serialization ("inf" stands for infinity)
// ---------------------------------------------------------------------------

inline double parse_extended_real(const std::string& tok) {
  const std::string t = detail::lower(tok);
  if (t == "inf" || t == "infinity") return infinity<double>();
  double v = 0;
  if (!detail::parse_number(t, v)) throw ParseError("expected a number or 'inf', got '" + tok + "'");
  return v;
}

inline json extended_real_to_json(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

inline double extended_real_from_json(const json& j) {
  if (j.is_string()) return parse_extended_real(j.get<std::string>());
  if (j.is_number()) return j.get<double>();
  throw ParseError("expected a number or 'inf'");
}

inline json norm_params_to_json(const NormParams<double>& prm) {
  return json{{"s", prm.s}, {"p", extended_real_to_json(prm.p)}, {"q", extended_real_to_json(prm.q)}};
}

inline NormParams<double> norm_params_from_json(const json& j) {
  return NormParams<double>::make(j.at("s").get<double>(), extended_real_from_json(j.at("p")),
                                  extended_real_from_json(j.at("q")));
}

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

inline json space_to_json(const PointCloudSpace<double>& space) {
  json j;
  j["weights"] = std::vector<double>(space.weights().begin(), space.weights().end());
  switch (space.metric_kind()) {
    case MetricKind::euclidean: {
      j["metric"] = "euclidean";
      json pts = json::array();
      for (Index i = 0; i < space.size(); ++i) {
        json row = json::array();
        for (Index c = 0; c < space.coords().cols(); ++c) row.push_back(space.coords()(i, c));
        pts.push_back(row);
      }
      j["points"] = pts;
      break;
    }
    case MetricKind::circle: {
      j["metric"] = "circle";
      j["points"] = std::vector<double>(space.circle_positions().begin(),
                                        space.circle_positions().end());
      break;
    }
    case MetricKind::matrix: {
      j["metric"] = "matrix";
      json rows = json::array();
      for (Index i = 0; i < space.size(); ++i) {
        json row = json::array();
        for (Index k = 0; k < space.size(); ++k) row.push_back(space.distance_matrix()(i, k));
        rows.push_back(row);
      }
      j["distances"] = rows;
      break;
    }
  }
  return j;
}

inline PointCloudSpace<double> space_from_json(const json& j) {
  if (!j.contains("metric")) throw ParseError("space JSON needs a 'metric' field");
  const std::string metric = j.at("metric").get<std::string>();

  auto read_weights = [&](Index n) {
    if (!j.contains("weights")) return VecX<double>::Constant(n, 1.0).eval();
    const auto& w = j.at("weights");
    if (static_cast<Index>(w.size()) != n) throw ParseError("weights length mismatch");
    VecX<double> out(n);
    for (Index i = 0; i < n; ++i) out[i] = w[static_cast<std::size_t>(i)].get<double>();
    return out;
  };

  if (metric == "euclidean") {
    const auto& pts = j.at("points");
    const Index n = static_cast<Index>(pts.size());
    if (n == 0) throw ParseError("space JSON has no points");
    const auto& first = pts[0];
    const Index dim = first.is_array() ? static_cast<Index>(first.size()) : 1;
    if (dim == 0) throw ParseError("points need at least one coordinate");
    MatX<double> coords(n, dim);
    for (Index i = 0; i < n; ++i) {
      const auto& row = pts[static_cast<std::size_t>(i)];
      if (row.is_array()) {
        if (static_cast<Index>(row.size()) != dim)
          throw ParseError("point " + std::to_string(i) + ": inconsistent dimension");
        for (Index c = 0; c < dim; ++c) coords(i, c) = row[static_cast<std::size_t>(c)].get<double>();
      } else {
        if (dim != 1) throw ParseError("point " + std::to_string(i) + ": inconsistent dimension");
        coords(i, 0) = row.get<double>();
      }
    }
    return PointCloudSpace<double>::from_points(std::move(coords), read_weights(n));
  }
  if (metric == "circle") {
    const auto& pts = j.at("points");
    const Index n = static_cast<Index>(pts.size());
    VecX<double> pos(n);
    for (Index i = 0; i < n; ++i) pos[i] = pts[static_cast<std::size_t>(i)].get<double>();
    return PointCloudSpace<double>::from_circle(std::move(pos), read_weights(n));
  }
  if (metric == "matrix") {
    const auto& rows = j.at("distances");
    const Index n = static_cast<Index>(rows.size());
    MatX<double> d(n, n);
    for (Index i = 0; i < n; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (static_cast<Index>(row.size()) != n) throw ParseError("distance matrix must be square");
      for (Index k = 0; k < n; ++k) d(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return PointCloudSpace<double>::from_distance_matrix(std::move(d), read_weights(n));
  }
  throw ParseError("unknown metric kind '" + metric + "'");
}

/// CSV rows are coordinates; a column named "weight" (header row required)
/// carries weights, which default to 1.  Lines starting with '#' are skipped.
inline PointCloudSpace<double> space_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto toks = detail::split_csv_row(line);
    if (toks.empty() || (toks.size() == 1 && toks[0].empty())) continue;
    if (rows.empty() && header.empty()) {
      double probe = 0;
      if (!detail::parse_number(toks[0], probe)) {
        header = toks;
        continue;
      }
    }
    std::vector<double> vals;
    for (std::size_t c = 0; c < toks.size(); ++c) {
      double v = 0;
      if (!detail::parse_number(toks[c], v))
        throw ParseError("row " + std::to_string(lineno) + ": expected number, got '" + toks[c] +
                         "'");
      vals.push_back(v);
    }
    if (!rows.empty() && vals.size() != rows.front().size())
      throw ParseError("row " + std::to_string(lineno) + ": inconsistent column count");
    if (!header.empty() && vals.size() != header.size())
      throw ParseError("row " + std::to_string(lineno) + ": column count differs from header");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("CSV contains no data rows");

  Index weight_col = -1;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string h = detail::lower(header[c]);
      if (h == "weight" || h == "w") weight_col = static_cast<Index>(c);
    }
  }
  const Index cols = static_cast<Index>(rows.front().size());
  const Index dim = weight_col >= 0 ? cols - 1 : cols;
  if (dim < 1) throw ParseError("CSV rows need at least one coordinate column");

  const Index n = static_cast<Index>(rows.size());
  MatX<double> coords(n, dim);
  VecX<double> w = VecX<double>::Constant(n, 1.0);
  for (Index i = 0; i < n; ++i) {
    Index c_out = 0;
    for (Index c = 0; c < cols; ++c) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      if (c == weight_col) {
        if (!(v > 0))
          throw ParseError("row " + std::to_string(i + (header.empty() ? 1 : 2)) +
                           ": weight must be positive");
        w[i] = v;
      } else {
        coords(i, c_out++) = v;
      }
    }
  }
  return PointCloudSpace<double>::from_points(std::move(coords), std::move(w));
}

inline PointCloudSpace<double> load_point_cloud(const std::string& path, FileFormat format) {
  const std::string text = detail::read_file(path);
  if (format == FileFormat::csv) return space_from_csv(text);
  try {
    return space_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline FileFormat guess_format(const std::string& path) {
  const std::string ext = detail::lower(std::filesystem::path(path).extension().string());
  if (ext == ".csv") return FileFormat::csv;
  return FileFormat::json;
}

/// Resolve a space argument: a generator spec ("grid1d:512", "gridd:32,2",
/// "circle:512", "cantor:6") or a path to a CSV/JSON file.
inline PointCloudSpace<double> resolve_space_arg(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon != std::string::npos && !std::filesystem::exists(arg)) {
    const std::string kind = arg.substr(0, colon);
    const std::string rest = arg.substr(colon + 1);
    auto parse_int = [&](const std::string& t) {
      double v = 0;
      if (!detail::parse_number(t, v) || v != std::floor(v))
        throw ParseError("space spec '" + arg + "': expected an integer, got '" + t + "'");
      return static_cast<Index>(v);
    };
    if (kind == "grid1d") return make_grid1d(parse_int(rest));
    if (kind == "circle") return make_circle(parse_int(rest));
    if (kind == "cantor") return make_cantor(static_cast<int>(parse_int(rest)));
    if (kind == "gridd") {
      const auto comma = rest.find(',');
      if (comma == std::string::npos)
        throw ParseError("space spec 'gridd' needs n,dim (e.g. gridd:32,2)");
      return make_gridd(parse_int(rest.substr(0, comma)),
                        static_cast<int>(parse_int(rest.substr(comma + 1))));
    }
    throw ParseError("unknown space spec '" + arg + "'");
  }
  if (!std::filesystem::exists(arg)) throw ParseError("no such file or space spec: " + arg);
  return load_point_cloud(arg, guess_format(arg));
}

// ---------------------------------------------------------------------------
// Fillings
// ---------------------------------------------------------------------------

inline json filling_to_json(const HyperbolicFilling<double>& filling) {
  json j;
  j["level_min"] = filling.level_min();
  j["level_max"] = filling.level_max();
  json levels = json::array();
  for (int n = filling.level_min(); n <= filling.level_max(); ++n) {
    json block;
    block["n"] = n;
    json verts = json::array();
    auto [b, e] = filling.level_span(n);
    for (int i = b; i < e; ++i) {
      const auto& v = filling.vertex(i);
      verts.push_back(json{{"id", v.id},
                           {"center", v.center},
                           {"radius", v.radius},
                           {"measure", v.measure}});
    }
    block["vertices"] = verts;
    levels.push_back(block);
  }
  j["levels"] = levels;
  json edges = json::array();
  for (const auto& e : filling.edges()) edges.push_back(json{{"tail", e.tail}, {"head", e.head}});
  j["edges"] = edges;
  return j;
}

/// Rebuild a filling from its JSON form.  Members, measures and adjacency are
/// recomputed from the space; stored measures are cross-checked.
inline HyperbolicFilling<double> filling_from_json(const json& j,
                                                   const PointCloudSpace<double>& space) {
  const int n_min = j.at("level_min").get<int>();
  const int n_max = j.at("level_max").get<int>();
  std::vector<std::pair<int, Index>> seeds;
  std::vector<double> stored_measures;
  for (const auto& block : j.at("levels")) {
    const int n = block.at("n").get<int>();
    for (const auto& v : block.at("vertices")) {
      seeds.emplace_back(n, v.at("center").get<Index>());
      stored_measures.push_back(v.value("measure", -1.0));
    }
  }
  std::vector<std::pair<int, int>> edge_list;
  for (const auto& e : j.at("edges"))
    edge_list.emplace_back(e.at("tail").get<int>(), e.at("head").get<int>());
  auto filling = HyperbolicFilling<double>::from_parts(space, n_min, n_max, seeds, edge_list);
  for (const auto& v : filling.vertices()) {
    const double stored = stored_measures[static_cast<std::size_t>(v.id)];
    if (stored >= 0 && std::abs(stored - v.measure) > 1e-9 * (1 + std::abs(stored)))
      throw ParseError("filling JSON: stored measure of vertex " + std::to_string(v.id) +
                       " disagrees with the space");
  }
  return filling;
}

// ---------------------------------------------------------------------------
// Sequences (vertex / edge / sample), JSON arrays indexed by id
// ---------------------------------------------------------------------------

inline json sequence_to_json(const VecX<double>& values, const std::string& kind) {
  return json{{"kind", kind}, {"values", std::vector<double>(values.begin(), values.end())}};
}

inline std::pair<VecX<double>, std::string> sequence_from_json(const json& j) {
  const std::string kind = j.value("kind", "vertex");
  const auto& vals = j.at("values");
  VecX<double> out(static_cast<Index>(vals.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = vals[static_cast<std::size_t>(i)].get<double>();
  return {std::move(out), kind};
}

inline VecX<double> load_sequence(const std::string& path, const std::string& expect_kind,
                                  Index expect_size) {
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  auto [vals, kind] = sequence_from_json(j);
  if (!expect_kind.empty() && kind != expect_kind)
    throw ParseError(path + ": expected a " + expect_kind + " sequence, got '" + kind + "'");
  if (expect_size >= 0 && vals.size() != expect_size)
    throw ParseError(path + ": sequence length " + std::to_string(vals.size()) +
                     " does not match expected " + std::to_string(expect_size));
  return vals;
}

// ---------------------------------------------------------------------------
// Reports and certificates
// ---------------------------------------------------------------------------

inline json structure_report_to_json(const StructureReport<double>& rep) {
  json j;
  json levels = json::array();
  for (const auto& lr : rep.levels) {
    levels.push_back(json{{"level", lr.level},
                          {"vertex_count", lr.vertex_count},
                          {"min_center_distance",
                           std::isinf(lr.min_center_distance) ? json("inf")
                                                              : json(lr.min_center_distance)},
                          {"required_separation", lr.required_separation},
                          {"covering_deficiency", lr.covering_deficiency},
                          {"quarter_disjoint_violations", lr.quarter_disjoint_violations},
                          {"max_overlap", lr.max_overlap}});
  }
  j["levels"] = levels;
  j["max_degree"] = rep.max_degree;
  j["edges_without_shared_members"] = rep.edges_without_shared_members;
  j["separation_ok"] = rep.separation_ok;
  j["covering_ok"] = rep.covering_ok;
  j["disjointness_ok"] = rep.disjointness_ok;
  return j;
}

inline json certificate_to_json(const FactorizationCertificate<double>& cert) {
  json j;
  j["theta"] = cert.theta;
  j["params0"] = norm_params_to_json(cert.params0);
  j["params1"] = norm_params_to_json(cert.params1);
  j["params"] = norm_params_to_json(cert.params);
  j["u0"] = std::vector<double>(cert.u0.begin(), cert.u0.end());
  j["u1"] = std::vector<double>(cert.u1.begin(), cert.u1.end());
  j["max_pointwise_error"] = cert.max_pointwise_error;
  j["norms"] = json{{"u0", cert.norm_u0}, {"u1", cert.norm_u1}, {"u", cert.norm_u}};
  j["bound_ratio"] = cert.bound_ratio;
  return j;
}

inline FactorizationCertificate<double> certificate_from_json(const json& j) {
  FactorizationCertificate<double> cert;
  cert.theta = j.at("theta").get<double>();
  cert.params0 = norm_params_from_json(j.at("params0"));
  cert.params1 = norm_params_from_json(j.at("params1"));
  cert.params = norm_params_from_json(j.at("params"));
  auto read_vec = [&](const json& arr) {
    VecX<double> v(static_cast<Index>(arr.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
    return v;
  };
  cert.u0 = read_vec(j.at("u0"));
  cert.u1 = read_vec(j.at("u1"));
  cert.max_pointwise_error = j.at("max_pointwise_error").get<double>();
  cert.norm_u0 = j.at("norms").at("u0").get<double>();
  cert.norm_u1 = j.at("norms").at("u1").get<double>();
  cert.norm_u = j.at("norms").at("u").get<double>();
  cert.bound_ratio = j.at("bound_ratio").get<double>();
  return cert;
}

inline void save_json(const std::string& path, const json& j) {
  detail::write_file(path, j.dump(2) + "\n");
}

inline json load_json(const std::string& path) {
  try {
    return json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace hypfill
