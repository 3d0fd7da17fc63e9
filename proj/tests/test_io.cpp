#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <random>

#include "polyact/experiments.hpp"
#include "polyact/io.hpp"

using namespace polyact;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch_dir() {
  auto p = std::filesystem::temp_directory_path() / "polyact_test_io";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(NetworkJson, RoundTrip) {
  const auto net = worked_example_network();
  const auto back = parse_network_json(network_to_json(net));
  EXPECT_EQ(back.dims(), net.dims());
  EXPECT_EQ(back.act_degrees(), net.act_degrees());
  ASSERT_EQ(back.weights().size(), net.weights().size());
  for (std::size_t l = 0; l < net.weights().size(); ++l) EXPECT_EQ(back.weights()[l], net.weights()[l]);
}

TEST(NetworkJson, FlatWeightsAccepted) {
  const auto net =
      parse_network_json(R"({"dims": [2, 1, 1], "act_degrees": [2], "weights": [[1.5, -2], [[3]]]})");
  EXPECT_EQ(net.weights()[0](0, 0), 1.5);
  EXPECT_EQ(net.weights()[0](0, 1), -2.0);
  EXPECT_EQ(net.weights()[1](0, 0), 3.0);
}

TEST(NetworkJson, ErrorsNameTheField) {
  const auto missing = error_of([] { parse_network_json(R"({"dims": [2, 1, 1], "weights": []})", "net.json"); });
  EXPECT_NE(missing.find("net.json"), std::string::npos) << missing;
  EXPECT_NE(missing.find("act_degrees"), std::string::npos) << missing;
  const auto bad_num = error_of(
      [] { parse_network_json(R"({"dims": [2, 1, 1], "act_degrees": [2], "weights": [[1, "x"], [[3]]]})"); });
  EXPECT_NE(bad_num.find("weights[0]"), std::string::npos) << bad_num;
  const auto syntax = error_of([] { parse_network_json("{\n  \"dims\": [2,\n}", "n.json"); });
  EXPECT_NE(syntax.find("line 3"), std::string::npos) << syntax;
  EXPECT_THROW(parse_network_json("[1, 2]"), InputError);
}

TEST(DataJson, RoundTrip) {
  const auto data = worked_example_data();
  const auto back = parse_data_json(data_to_json(data));
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back.samples[i].x, data.samples[i].x);
    EXPECT_EQ(back.samples[i].y, data.samples[i].y);
  }
}

TEST(DataCsv, RoundTripFullPrecision) {
  std::mt19937_64 rng(6);
  const auto net = random_network({3, 4, 2}, {2}, rng);
  const auto data = generate_synthetic(net, 5, 0.1, 42);
  const auto back = parse_data_csv(data_to_csv(data));
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back.samples[i].x, data.samples[i].x);
    EXPECT_EQ(back.samples[i].y, data.samples[i].y);
  }
}

TEST(DataCsv, ErrorsNameLineAndField) {
  const auto bad = error_of([] { parse_data_csv("x_1,y_1\n1,2\n3,abc\n", "d.csv"); });
  EXPECT_NE(bad.find("d.csv"), std::string::npos) << bad;
  EXPECT_NE(bad.find("line 3"), std::string::npos) << bad;
  EXPECT_NE(bad.find("y_1"), std::string::npos) << bad;
  EXPECT_THROW(parse_data_csv("a,b\n1,2\n"), InputError);
  EXPECT_THROW(parse_data_csv("x_1,y_1\n1\n"), InputError);
}

TEST(Data, WrongOutputWidthNamesLayer) {
  TrainingSet data = worked_example_data();
  data.samples[0].y = Eigen::VectorXd::Zero(3);
  const auto msg = error_of([&] { data.validate_against(worked_example_network()); });
  EXPECT_NE(msg.find("m_3"), std::string::npos) << msg;
}

TEST(Files, WriteReadByExtension) {
  const auto dir = scratch_dir() / "nested";
  const auto data = worked_example_data();
  write_text(dir / "d.json", data_to_json(data));
  write_text(dir / "d.csv", data_to_csv(data));
  write_text(dir / "n.json", network_to_json(worked_example_network()));
  EXPECT_EQ(read_data(dir / "d.json").samples[1].y, data.samples[1].y);
  EXPECT_EQ(read_data(dir / "d.csv").samples[1].y, data.samples[1].y);
  EXPECT_EQ(read_network(dir / "n.json").dims(), worked_example_network().dims());
  write_text(dir / "d.txt", "x");
  EXPECT_THROW(read_data(dir / "d.txt"), InputError);
  EXPECT_THROW(read_text(dir / "absent.json"), InputError);
  std::filesystem::remove_all(scratch_dir());
}

TEST(Provenance, SerializesSeedAndCoefficients) {
  std::mt19937_64 rng(6);
  const auto net = random_network({2, 2, 2}, {1}, rng);
  const auto data = generate_synthetic(net, 3, 0.01, 77);
  const auto text = provenance_to_json(*data.provenance);
  EXPECT_NE(text.find("\"seed\""), std::string::npos);
  EXPECT_NE(text.find("77"), std::string::npos);
  EXPECT_NE(text.find("\"c_true\""), std::string::npos);
}
