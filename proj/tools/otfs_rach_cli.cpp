#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "otfs_rach/otfs_rach.h"

int main(int argc, char** argv) {
  CLI::App app{"OTFS random-access preamble simulator"};
  std::string config;
  std::vector<std::string> overrides;
  int workers = 0;
  std::string out_dir;
  app.add_option("config", config, "experiment config (JSON)")->required();
  app.add_option("--overrides", overrides, "dotted key=value assignments, e.g. mdp.cfo_hz=15000");
  app.add_option("--workers", workers, "worker threads (0 = all cores)");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.set_version_flag("--version", std::string(otfs_version()));
  CLI11_PARSE(app, argc, argv);

  std::vector<const char*> ov;
  ov.reserve(overrides.size());
  for (const auto& s : overrides) ov.push_back(s.c_str());

  char* out = nullptr;
  const otfs_status st = otfs_run(config.c_str(), ov.data(), ov.size(), workers,
                                  out_dir.empty() ? nullptr : out_dir.c_str(), &out);
  if (st != OTFS_OK) {
    std::fprintf(stderr, "%s\n", otfs_last_error_json());
    return static_cast<int>(st);
  }
  const auto j = nlohmann::json::parse(out);
  otfs_free_string(out);
  const std::string report = j.value("report_text", "");
  if (!report.empty()) std::printf("%s", report.c_str());
  std::printf("%s\n", j.value("summary", "").c_str());
  return 0;
}
