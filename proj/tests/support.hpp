#pragma once

// Small builders shared by the unit and acceptance tests.

#include <filesystem>
#include <random>
#include <string>

#include "eerec/model.hpp"
#include "eerec/time.hpp"

namespace eerec::test {

inline SensorReading reading(Timestamp t, SensorKind kind, double value, Placement placement = Placement::Indoor,
                             std::string sensor = {}) {
  if (sensor.empty()) sensor = std::string(to_string(kind)) + "-" + std::string(to_string(placement));
  return SensorReading{t, std::move(sensor), kind, placement, value};
}

inline SensorReading motion(Timestamp t, bool on) { return reading(t, SensorKind::Motion, on ? 1.0 : 0.0); }

inline SensorReading power(Timestamp t, const std::string& appliance, double kw) {
  return reading(t, SensorKind::DevicePower, kw, Placement::Indoor, appliance);
}

inline Appliance appliance(std::string id, ApplianceKind kind, double kw, bool on, Timestamp since = {}) {
  return Appliance{std::move(id), kind, kw, on, since};
}

/// Complete snapshot with mild indoor/outdoor conditions and nothing favorable.
inline ContextSnapshot snapshot(Timestamp t, bool occupied, std::vector<Appliance> appliances = {}) {
  ContextSnapshot s;
  s.time = t;
  s.indoor_temp = 25.0;
  s.outdoor_temp = 30.0;
  s.indoor_lux = 300.0;
  s.outdoor_lux = 2000.0;
  s.room_occupied = occupied;
  s.absent_for = Duration{occupied ? 0 : 3600};
  s.appliances = std::move(appliances);
  return s;
}

/// Fresh directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("eerec-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string data_file(const std::string& rel) { return std::string(EEREC_TEST_DATA_DIR) + "/" + rel; }

}  // namespace eerec::test
