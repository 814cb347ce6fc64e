#include "radseg/log_io.hpp"
#include "radseg/simgen.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace radseg;

namespace
{

std::vector<Detection> random_log(std::uint64_t seed, std::size_t n)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::vector<Detection> log(n);
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        t += std::abs(u(rng)) * 1e-3;
        Detection& d = log[i];
        d.time = t;
        d.sensor_id = static_cast<int>(i % 3);
        d.range = std::abs(u(rng));
        d.azimuth = u(rng) / 100.0;
        d.radial_velocity = u(rng) / 7.0;
        d.amplitude = u(rng);
        d.x = u(rng) / 3.0;
        d.y = u(rng) * 1e-7;
        if (i % 4 != 0)
            d.gt_label = static_cast<int>(i % 5);
    }
    return log;
}

void expect_equal(const std::vector<Detection>& a, const std::vector<Detection>& b)
{
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        EXPECT_EQ(a[i].time, b[i].time);
        EXPECT_EQ(a[i].sensor_id, b[i].sensor_id);
        EXPECT_EQ(a[i].range, b[i].range);
        EXPECT_EQ(a[i].azimuth, b[i].azimuth);
        EXPECT_EQ(a[i].radial_velocity, b[i].radial_velocity);
        EXPECT_EQ(a[i].amplitude, b[i].amplitude);
        EXPECT_EQ(a[i].x, b[i].x);
        EXPECT_EQ(a[i].y, b[i].y);
        EXPECT_EQ(a[i].gt_label, b[i].gt_label);
    }
}

} // namespace

TEST(LogIo, CsvRoundTripIsExact)
{
    const auto log = random_log(3, 200);
    std::stringstream ss;
    io::write_detections_csv(ss, log);
    expect_equal(log, io::read_detections_csv(ss));
}

TEST(LogIo, JsonLinesRoundTripIsExact)
{
    const auto log = random_log(4, 200);
    std::stringstream ss;
    io::write_detections_jsonl(ss, log);
    expect_equal(log, io::read_detections_jsonl(ss));
}

TEST(LogIo, CsvHeaderAndBackgroundLabel)
{
    Detection d;
    std::stringstream ss;
    io::write_detections_csv(ss, {d});
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    EXPECT_EQ(header, io::kDetectionHeader);
    EXPECT_EQ(row.back(), ',');
}

TEST(LogIo, MalformedRowReportsLine)
{
    std::istringstream in(std::string(io::kDetectionHeader) + "\n0,0,1,0,0,0,0,0,\n0.1,0,abc,0,0,0,0,0,\n");
    try
    {
        io::read_detections_csv(in, "log.csv");
        FAIL() << "expected ParseError";
    }
    catch (const ParseError& e)
    {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("log.csv"), std::string::npos);
        EXPECT_NE(msg.find(":3"), std::string::npos) << msg;
    }
}

TEST(LogIo, WrongHeaderIsRejected)
{
    std::istringstream in("t,x\n1,2\n");
    EXPECT_THROW(io::read_detections_csv(in), ParseError);
}

TEST(LogIo, PosesMountsAssignmentsRoundTrip)
{
    std::vector<EgoPose> poses{{0.0, 1.0, 2.0, 0.1, 3.0, 0.01}, {0.1, 1.3, 2.0, 0.11, 3.0, 0.01}};
    std::stringstream ps;
    io::write_poses_csv(ps, poses);
    const auto p2 = io::read_poses_csv(ps);
    ASSERT_EQ(p2.size(), 2u);
    EXPECT_EQ(p2[1].x, 1.3);
    EXPECT_EQ(p2[1].heading, 0.11);

    std::vector<SensorMount> mounts{{0, 3.6, 0.8, 0.35}, {1, 3.6, -0.8, -0.35}};
    std::stringstream ms;
    io::write_mounts_csv(ms, mounts);
    const auto m2 = io::read_mounts_csv(ms);
    ASSERT_EQ(m2.size(), 2u);
    EXPECT_EQ(m2[1].yaw, -0.35);

    ClusterAssignment a{0.0, 0.25, {0, 1, 4}, {0, kNoise, 0}};
    ClusterAssignment b{0.05, 0.3, {1, 4}, {0, 1}};
    std::stringstream as;
    io::write_assignments_csv(as, {a, b});
    const auto w = io::read_assignments_csv(as);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[0].indices, a.indices);
    EXPECT_EQ(w[0].labels, a.labels);
    EXPECT_EQ(w[1].t_start, 0.05);
    EXPECT_EQ(w[1].labels, b.labels);
}

TEST(LogIo, EmptyAssignmentWindowSurvives)
{
    // a window without detections still has to come back
    ClusterAssignment empty{0.0, 0.25, {}, {}};
    ClusterAssignment one{0.05, 0.3, {2}, {kNoise}};
    std::stringstream as;
    io::write_assignments_csv(as, {empty, one});
    const auto w = io::read_assignments_csv(as);
    ASSERT_FALSE(w.empty());
    EXPECT_EQ(w.back().indices, one.indices);
}

TEST(LogIo, GeneratedSceneIsValid)
{
    for (const auto& spec : standard_suite(5))
        EXPECT_TRUE(validate_log(generate(spec).detections).empty()) << spec.name;
}
