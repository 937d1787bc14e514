#include "warmlab/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace warmlab {

std::string format_double(double v) {
  char buf[64];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

std::string trajectory_csv_string(const Trajectory& traj) {
  std::string out = "t,eta,f,gap,grad_norm,est_smoothness\n";
  for (const TrajectoryPoint& p : traj.points) {
    out += std::to_string(p.t);
    out += ',';
    out += format_double(p.eta);
    out += ',';
    out += format_double(p.f);
    out += ',';
    out += format_double(p.gap);
    out += ',';
    out += format_double(p.grad_norm);
    out += ',';
    if (p.est_smoothness) out += format_double(*p.est_smoothness);
    out += '\n';
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << trajectory_csv_string(traj);
  if (!f) throw std::runtime_error("write failed: " + path);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("bad numeric field '" + s + "'");
  }
  return v;
}

}  // namespace

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "t,eta,f,gap,grad_norm,est_smoothness") {
    throw std::runtime_error("bad trajectory header in " + path);
  }
  Trajectory traj;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TrajectoryPoint p{};
    std::getline(ss, field, ',');
    p.t = std::atoll(field.c_str());
    std::getline(ss, field, ',');
    p.eta = parse_double(field);
    std::getline(ss, field, ',');
    p.f = parse_double(field);
    std::getline(ss, field, ',');
    p.gap = parse_double(field);
    std::getline(ss, field, ',');
    p.grad_norm = parse_double(field);
    if (std::getline(ss, field, ',') && !field.empty()) {
      p.est_smoothness = parse_double(field);
    }
    traj.points.push_back(p);
  }
  traj.steps = traj.points.empty()
                   ? 0
                   : static_cast<long long>(traj.points.size()) - 1;
  return traj;
}

}  // namespace warmlab
