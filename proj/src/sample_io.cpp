#include "upplane/sample_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace upplane::sample_io {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".json";
  return p;
}

}  // namespace

void save_samples_f32(const std::filesystem::path& path,
                      const numstats::SampleSet& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<float> row(s.d());
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    for (Eigen::Index j = 0; j < s.d(); ++j)
      row[j] = static_cast<float>(s.data()(i, j));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());

  nlohmann::json meta = {{"n", s.n()}, {"d", s.d()}, {"dtype", "f32"}};
  std::ofstream side(sidecar_path(path));
  if (!side)
    throw Error(Errc::IoError, "cannot open " + sidecar_path(path).string());
  side << meta.dump() << "\n";
}

numstats::SampleSet load_samples_f32(const std::filesystem::path& path) {
  std::ifstream side(sidecar_path(path));
  if (!side)
    throw Error(Errc::IoError,
                "missing sidecar " + sidecar_path(path).string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptHeader, e.what());
  }
  if (!meta.contains("n") || !meta.contains("d") ||
      meta.value("dtype", "") != "f32")
    throw Error(Errc::CorruptHeader,
                "sidecar must carry n, d and dtype == \"f32\"");
  const auto n = meta["n"].get<std::int64_t>();
  const auto d = meta["d"].get<std::int64_t>();
  if (n < 1 || d < 1)
    throw Error(Errc::CorruptHeader, "sidecar n and d must be positive");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<float> buf(static_cast<std::size_t>(n * d));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (in.gcount() !=
      static_cast<std::streamsize>(buf.size() * sizeof(float)))
    throw Error(Errc::TruncatedData, "tensor payload shorter than n*d");

  Eigen::MatrixXd data(n, d);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j)
      data(i, j) = static_cast<double>(buf[static_cast<std::size_t>(i * d + j)]);
  return numstats::SampleSet(std::move(data));
}

void save_samples_csv(const std::filesystem::path& path,
                      const numstats::SampleSet& s) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    for (Eigen::Index j = 0; j < s.d(); ++j) {
      if (j) out << ',';
      out << s.data()(i, j);
    }
    out << '\n';
  }
}

numstats::SampleSet load_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(Errc::CorruptHeader, "non-numeric CSV cell: " + cell);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Errc::CorruptHeader, "ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::EmptyInput, "empty CSV " + path.string());
  Eigen::MatrixXd data(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return numstats::SampleSet(std::move(data));
}

numstats::SampleSet load_samples(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_samples_csv(path);
  return load_samples_f32(path);
}

}  // namespace upplane::sample_io
