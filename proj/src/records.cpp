#include "maac/records.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace maac {

namespace {

std::string join_obs(const Obs& z) {
  std::string out;
  char buf[32];
  for (size_t i = 0; i < z.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(z[i]));
    if (i) out += ',';
    out += buf;
  }
  return out;
}

Obs parse_obs(const std::string& s) {
  Obs z;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) z.push_back(std::stof(tok));
  return z;
}

}  // namespace

void write_records(std::ostream& os, const std::vector<StepRecord>& records) {
  char buf[32];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.r);
    os << r.t << ' ' << r.agent << ' ' << join_obs(r.z) << ' ' << r.m << ' '
       << buf << ' ' << (r.terminated ? 1 : 0) << ' ' << join_obs(r.z_next)
       << '\n';
  }
}

std::vector<StepRecord> read_records(std::istream& is) {
  std::vector<StepRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    StepRecord r;
    std::string z, zn;
    int term = 0;
    ss >> r.t >> r.agent >> z >> r.m >> r.r >> term >> zn;
    if (ss.fail()) throw std::runtime_error("malformed record line: " + line);
    r.z = parse_obs(z);
    r.z_next = parse_obs(zn);
    r.terminated = term != 0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace maac
