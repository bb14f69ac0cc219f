#pragma once
#include <string>
#include <vector>

#include "dnk/quality.hpp"
#include "dnk/student.hpp"
#include "dnk/teacher.hpp"

namespace dnk {

// DNKMODL1 container: 8-byte magic, one text header line
//   kind=<k> H=<h> hidden=<w> latent=<l> params=<n> config=<hex16> seed=<u64>
// followed by <n> little-endian 64-bit floats. Unused dimension fields are 0.
struct ModelMeta {
  std::string kind;  // teacher | scorer | student-fdk | student-kdm
  int H = 0;
  int hidden = 0;
  int latent = 0;
  uint64_t config_hash = 0;
  uint64_t seed = 0;
};

void save_model_file(const std::string& path, const ModelMeta& meta,
                     const std::vector<double>& theta);
// Reads header and parameters; validates magic and structural consistency.
ModelMeta load_model_file(const std::string& path, std::vector<double>& theta);

// Typed wrappers. Loads check the stored kind and dimensions, rebuild the
// matching architecture, and reject a config hash different from the one the
// caller is running with (a zero expectation skips the check for tools that
// only inspect files).
void save_teacher_model(const std::string& path, const Teacher& t, uint64_t config_hash,
                        uint64_t seed);
Teacher load_teacher_model(const std::string& path, uint64_t expected_config);

void save_scorer_model(const std::string& path, const Scorer& s, uint64_t config_hash,
                       uint64_t seed);
Scorer load_scorer_model(const std::string& path, uint64_t expected_config);

void save_student_model(const std::string& path, const StudentModel& m, uint64_t config_hash,
                        uint64_t seed);
StudentModel load_student_model(const std::string& path, uint64_t expected_config);

}  // namespace dnk
