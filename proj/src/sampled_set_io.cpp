#include <fstream>
#include <sstream>

#include "json.hpp"

#include "menergy/errors.hpp"
#include "menergy/sampled_set.hpp"

namespace menergy {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mat rows_to_frame(const json& rows, int n) {
  if (!rows.is_array() || rows.empty()) throw IoError("frame must be a nonempty array of vectors");
  Mat f(n, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const json& v = rows[j];
    if (!v.is_array() || static_cast<int>(v.size()) != n) throw IoError("frame vector has wrong length");
    for (int i = 0; i < n; ++i) f(i, static_cast<Eigen::Index>(j)) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return f;
}

Subspace checked_frame(const Mat& f) {
  try {
    return Subspace::from_frame(f);
  } catch (const PreconditionError& e) {
    throw IoError(std::string("invalid frame: ") + e.what());
  }
}

}  // namespace

std::string to_json(const SampledSet& s) {
  json j;
  j["format"] = "sampled-set/1";
  j["ambient_dim"] = s.ambient_dim();
  j["intrinsic_dim"] = s.intrinsic_dim();
  json pts = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    json p = json::array();
    for (int k = 0; k < s.ambient_dim(); ++k) p.push_back(s.points()(k, static_cast<Eigen::Index>(i)));
    pts.push_back(std::move(p));
  }
  j["points"] = std::move(pts);
  if (s.has_frames()) {
    json frs = json::array();
    for (const auto& f : s.frames()) {
      json rows = json::array();
      for (int c = 0; c < f.dim(); ++c) {
        json v = json::array();
        for (int k = 0; k < f.ambient_dim(); ++k) v.push_back(f.frame()(k, c));
        rows.push_back(std::move(v));
      }
      frs.push_back(std::move(rows));
    }
    j["frames"] = std::move(frs);
  }
  j["weights"] = s.weights();
  if (!s.labels().empty()) j["labels"] = s.labels();
  return j.dump();
}

SampledSet from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) != "sampled-set/1")
      throw IoError("missing or unknown \"format\" (expected sampled-set/1)");
    for (const char* key : {"ambient_dim", "intrinsic_dim", "points", "weights"})
      if (!j.contains(key)) throw IoError(std::string("missing field \"") + key + "\"");
    const int n = j.at("ambient_dim").get<int>();
    const int m = j.at("intrinsic_dim").get<int>();
    if (n < 1 || m < 1 || m > n) throw IoError("invalid dimensions");
    const json& pts = j.at("points");
    if (!pts.is_array()) throw IoError("points must be an array");
    Mat p(n, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].is_array() || static_cast<int>(pts[i].size()) != n)
        throw IoError("point " + std::to_string(i) + " has wrong length");
      for (int k = 0; k < n; ++k) p(k, static_cast<Eigen::Index>(i)) = pts[i][static_cast<std::size_t>(k)].get<double>();
    }
    std::vector<Subspace> frames;
    if (j.contains("frames")) {
      const json& frs = j.at("frames");
      if (!frs.is_array() || frs.size() != pts.size()) throw IoError("frames must match points");
      for (const auto& rows : frs) {
        const Mat f = rows_to_frame(rows, n);
        if (f.cols() != m) throw IoError("frame has wrong intrinsic dimension");
        frames.push_back(checked_frame(f));
      }
    }
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != pts.size()) throw IoError("weights must match points");
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    try {
      return SampledSet(n, m, std::move(p), std::move(frames), weights, std::move(labels));
    } catch (const PreconditionError& e) {
      throw IoError(std::string("invalid sampled set: ") + e.what());
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("schema violation: ") + e.what());
  }
}

SampledSet parse_csv_cloud(const std::string& text, int intrinsic_dim) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IoError("CSV: not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError("CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("CSV: no points");
  const int n = static_cast<int>(rows.front().size());
  Mat p(n, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < n; ++k) p(k, static_cast<Eigen::Index>(i)) = rows[i][static_cast<std::size_t>(k)];
  try {
    return SampledSet(n, intrinsic_dim, std::move(p), {}, {});
  } catch (const PreconditionError& e) {
    throw IoError(std::string("CSV: ") + e.what());
  }
}

SampledSet load_sampled_set(const std::string& path, int intrinsic_dim_for_csv) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return from_json(text);
  return parse_csv_cloud(text, intrinsic_dim_for_csv);
}

void save_sampled_set(const SampledSet& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << to_json(s) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

Subspace frame_from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw IoError("frame file must be an array of vectors");
  try {
    return checked_frame(rows_to_frame(j, static_cast<int>(j[0].size())));
  } catch (const json::exception& e) {
    throw IoError(std::string("schema violation: ") + e.what());
  }
}

}  // namespace menergy
