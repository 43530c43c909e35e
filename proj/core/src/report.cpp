// Copyright 2026 The hybridnn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hybridnn/analysis.hpp"
#include "hybridnn/errors.hpp"

namespace hnn {
namespace {

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string snr_text(double snr) { return std::isinf(snr) ? "inf" : fmt(snr); }

std::string thousands(std::size_t n) {
  if (n < 1000) return std::to_string(n);
  return fmt(static_cast<double>(n) / 1000.0, 3) + " k";
}

}  // namespace

nlohmann::json run_record_to_json(const RunRecord& r) {
  return {{"condition", r.condition},
          {"snr_db", std::isinf(r.snr_db) ? nlohmann::json("inf") : nlohmann::json(r.snr_db)},
          {"model", r.model},
          {"test_loss", r.test_loss},
          {"test_accuracy", r.test_accuracy},
          {"params", r.params},
          {"seed", r.seed}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.condition = j.value("condition", std::string{});
    const auto& s = j.at("snr_db");
    r.snr_db = s.is_string() ? INFINITY : s.get<double>();
    r.model = j.at("model").get<std::string>();
    r.test_loss = j.at("test_loss").get<double>();
    r.test_accuracy = j.value("test_accuracy", 0.0);
    r.params = j.at("params").get<std::size_t>();
    r.seed = j.value("seed", std::uint64_t{0});
    if (r.condition.empty()) r.condition = std::isinf(r.snr_db) ? "No noise" : snr_text(r.snr_db) + " dB";
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed run record: ") + e.what());
  }
}

std::string comparison_csv(std::span<const RunRecord> runs) {
  std::ostringstream os;
  os << "snr_db,model,test_loss,params,test_accuracy,seed\n";
  for (const auto& r : runs) {
    os << snr_text(r.snr_db) << ',' << r.model << ',' << fmt(r.test_loss, 8) << ',' << r.params
       << ',' << fmt(r.test_accuracy, 6) << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string comparison_markdown(std::span<const RunRecord> runs) {
  std::ostringstream os;
  os << "| Noise | Model | Test loss | Parameters |\n|---|---|---|---|\n";
  for (const auto& r : runs) {
    os << "| " << r.condition << " | " << r.model << " | " << fmt(r.test_loss, 4) << " | "
       << thousands(r.params) << " |\n";
  }
  return os.str();
}

std::string architecture_csv(const NetworkSpec& spec) {
  std::ostringstream os;
  os << "block,path,activation,conversion,c,k,n,p,norm,pool\n";
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    for (auto k : kAllPaths) {
      const auto& p = spec.blocks[b].path(k);
      if (!p) continue;
      os << b << ',' << to_string(k) << ',' << p->activation << ','
         << (p->conversion ? p->conversion->name() : "") << ',' << p->channels << ','
         << p->kernel << ',' << p->groups << ',' << fmt(p->dropout) << ',' << (p->norm ? 1 : 0)
         << ',' << spec.blocks[b].pool << '\n';
    }
  }
  return os.str();
}

std::string architecture_markdown(const NetworkSpec& spec) {
  std::ostringstream os;
  os << "| Block | Path | Activation | Conversion | c | k | n | p |\n"
        "|---|---|---|---|---|---|---|---|\n";
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    for (auto k : kAllPaths) {
      const auto& p = spec.blocks[b].path(k);
      if (!p) continue;
      os << "| " << b << " | " << to_string(k) << " | " << p->activation << " | "
         << (p->conversion ? to_string(p->conversion->kind) : "-") << " | " << p->channels << " | "
         << p->kernel << " | " << p->groups << " | " << fmt(p->dropout) << " |\n";
    }
  }
  return os.str();
}

std::string trials_csv(std::span<const Trial> trials) {
  std::ostringstream os;
  os << "trial_id,phase,status,validation_loss,param_count,note\n";
  for (const auto& t : trials) {
    os << t.trial_id << ',' << to_string(t.phase) << ',' << to_string(t.status) << ','
       << (std::isfinite(t.validation_loss) ? fmt(t.validation_loss, 8) : "") << ','
       << t.param_count << ",\"" << t.note << "\"\n";
  }
  return os.str();
}

std::string crop_curve_csv(std::span<const CropPoint> points) {
  std::ostringstream os;
  os << "crop_ratio,accuracy,loss\n";
  for (const auto& p : points) {
    os << fmt(p.ratio, 3) << ',' << fmt(p.accuracy, 6) << ',' << fmt(p.loss, 8) << '\n';
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace hnn
