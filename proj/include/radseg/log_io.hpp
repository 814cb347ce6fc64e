#pragma once

#include "radseg/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace radseg::io
{

// Detection logs: CSV with header
//   time,sensor_id,range,azimuth,radial_velocity,amplitude,x,y,gt_label
// (gt_label empty for background) or JSON lines with the same keys
// (gt_label null or absent for background). Reals are written in shortest
// round-trip form, so write -> read is lossless.

inline constexpr const char* kDetectionHeader = "time,sensor_id,range,azimuth,radial_velocity,amplitude,x,y,gt_label";
inline constexpr const char* kPoseHeader = "time,x,y,heading,speed,yaw_rate";
inline constexpr const char* kMountHeader = "sensor_id,x,y,yaw";
inline constexpr const char* kAssignmentHeader = "window_start,window_end,detection_index,label";

std::string format_real(double v);

void write_detections_csv(std::ostream& os, const std::vector<Detection>& dets);
std::vector<Detection> read_detections_csv(std::istream& is, const std::string& source = "<stream>");

void write_detections_jsonl(std::ostream& os, const std::vector<Detection>& dets);
std::vector<Detection> read_detections_jsonl(std::istream& is, const std::string& source = "<stream>");

/// Picks the reader by extension (.jsonl / .json -> JSON lines, else CSV).
std::vector<Detection> load_detections(const std::string& path);
void save_detections(const std::string& path, const std::vector<Detection>& dets);

void write_poses_csv(std::ostream& os, const std::vector<EgoPose>& poses);
std::vector<EgoPose> read_poses_csv(std::istream& is, const std::string& source = "<stream>");
std::vector<EgoPose> load_poses(const std::string& path);
void save_poses(const std::string& path, const std::vector<EgoPose>& poses);

void write_mounts_csv(std::ostream& os, const std::vector<SensorMount>& mounts);
std::vector<SensorMount> read_mounts_csv(std::istream& is, const std::string& source = "<stream>");
std::vector<SensorMount> load_mounts(const std::string& path);
void save_mounts(const std::string& path, const std::vector<SensorMount>& mounts);

void write_assignments_csv(std::ostream& os, const std::vector<ClusterAssignment>& windows);
std::vector<ClusterAssignment> read_assignments_csv(std::istream& is, const std::string& source = "<stream>");
std::vector<ClusterAssignment> load_assignments(const std::string& path);
void save_assignments(const std::string& path, const std::vector<ClusterAssignment>& windows);

} // namespace radseg::io
