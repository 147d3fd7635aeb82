#include "wavesrc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wavesrc/config.hpp"
#include "wavesrc/error.hpp"

namespace wavesrc {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

fs::path write_measurements(const MeasurementSet& data, const fs::path& dir, const std::string& stem,
                            const std::optional<Signal>& signal) {
  data.validate();
  fs::create_directories(dir);
  const std::string csv_name = stem + ".csv";
  {
    std::ofstream csv(dir / csv_name, std::ios::binary);
    if (!csv) throw ValidationError("cannot write '" + (dir / csv_name).string() + "'");
    for (std::size_t i = 0; i < data.samples.rows(); ++i) {
      const auto row = data.samples.row(i);
      for (std::size_t k = 0; k < row.size(); ++k) csv << (k ? "," : "") << format_double(row[k]);
      csv << '\n';
    }
  }

  json sensors = json::array();
  for (const Vec3& p : data.sensors.points()) sensors.push_back({p.x, p.y, p.z});
  json desc = {{"format", kMeasurementFormat},
               {"csv", csv_name},
               {"provenance", to_string(data.provenance)},
               {"wave_speed", data.wave_speed},
               {"time", {{"T", data.timegrid.terminal()}, {"N_T", data.timegrid.steps()}}},
               {"sensors", sensors}};
  desc["noise"] = data.noise ? json{{"level", data.noise->level},
                                    {"seed", data.noise->seed},
                                    {"generator", data.noise->generator}}
                             : json(nullptr);
  if (signal) desc["signal"] = to_json(*signal);

  const fs::path out = dir / (stem + ".json");
  std::ofstream js(out, std::ios::binary);
  if (!js) throw ValidationError("cannot write '" + out.string() + "'");
  js << desc.dump(2) << '\n';
  return out;
}

MeasurementSet read_measurements(const fs::path& descriptor) {
  std::ifstream in(descriptor);
  if (!in) throw ValidationError("cannot open measurements '" + descriptor.string() + "'", "data");
  json desc;
  try {
    desc = json::parse(in);
    if (desc.value("format", "") != kMeasurementFormat)
      throw ValidationError("unsupported format '" + desc.value("format", "") + "'", "data.format");

    std::vector<Vec3> pts;
    for (const auto& p : desc.at("sensors")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    const TimeGrid tg(desc.at("time").at("T").get<double>(), desc.at("time").at("N_T").get<std::size_t>());
    const std::size_t nx = pts.size();
    MeasurementSet data{SensorArray(std::move(pts)), tg, desc.at("wave_speed").get<double>(), Matrix(nx, tg.steps()),
                        std::nullopt, provenance_from_string(desc.value("provenance", "external"))};
    if (!desc.at("noise").is_null()) {
      const json& n = desc.at("noise");
      data.noise = NoiseInfo{n.at("level").get<double>(), n.at("seed").get<std::uint64_t>(),
                             n.value("generator", std::string(kNoiseGeneratorId))};
    }

    const fs::path csv_path = descriptor.parent_path() / desc.at("csv").get<std::string>();
    std::ifstream csv(csv_path);
    if (!csv) throw ValidationError("cannot open '" + csv_path.string() + "'", "data.csv");
    std::string line;
    std::size_t row = 0;
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      if (row >= data.samples.rows()) throw ValidationError("more rows than sensors", "data.csv");
      std::size_t col = 0;
      const char* p = line.data();
      const char* end = line.data() + line.size();
      while (p < end) {
        if (col >= data.samples.cols()) throw ValidationError("row " + std::to_string(row) + " too long", "data.csv");
        double v = 0.0;
        const auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc()) throw ValidationError("bad number in row " + std::to_string(row), "data.csv");
        data.samples(row, col++) = v;
        p = next;
        if (p < end && *p == ',') ++p;
      }
      if (col != data.samples.cols()) throw ValidationError("row " + std::to_string(row) + " too short", "data.csv");
      ++row;
    }
    if (row != data.samples.rows()) throw ValidationError("fewer rows than sensors", "data.csv");
    data.validate();
    return data;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed descriptor: ") + e.what(), "data");
  }
}

}  // namespace wavesrc
