#include "tslab/error.hpp"
#include "tslab/indicators.hpp"
#include "tslab/random.hpp"
#include "tslab/scaling.hpp"
#include "tslab/tensor_io.hpp"
#include "tslab/windowing.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

using namespace tslab;

namespace {

SliceSpec spec_of(Eigen::Index n, Eigen::Index stride, Eigen::Index horizon, std::vector<std::string> names = {"x"}) {
  SliceSpec s;
  s.lookback = n;
  s.stride = stride;
  s.label_horizon = horizon;
  s.channels = std::move(names);
  return s;
}

}  // namespace

TEST(MakeSlices, TwentyTwoReturnsTwoSlices) {
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(22, 0, 21);
  const SliceTensor t = make_slices({r}, spec_of(20, 1, 1));
  ASSERT_EQ(t.slice_count(), 2);
  EXPECT_EQ(t(0, 0, 0), 0);
  EXPECT_EQ(t(0, 19, 0), 19);
  EXPECT_EQ(t(1, 0, 0), 1);
  EXPECT_EQ(t(1, 19, 0), 20);
  EXPECT_EQ(t.end_indices(), (std::vector<Eigen::Index>{19, 20}));
}

TEST(MakeSlices, StrideTwo) {
  const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(5, 0, 4);
  const SliceTensor t = make_slices({r}, spec_of(2, 2, 0));
  ASSERT_EQ(t.slice_count(), 2);
  EXPECT_EQ(t(0, 0, 0), 0);
  EXPECT_EQ(t(0, 1, 0), 1);
  EXPECT_EQ(t(1, 0, 0), 2);
  EXPECT_EQ(t(1, 1, 0), 3);
  EXPECT_EQ(t.stride(), 2);
}

TEST(MakeSlices, EnumerationOracle) {
  Rng rng(4);
  const Eigen::VectorXd a = rng.normal_vector(200);
  const Eigen::VectorXd b = rng.normal_vector(200);
  const SliceTensor t = make_slices({a, b}, spec_of(20, 1, 5, {"a", "b"}));
  // Every start s with s + 20 + 5 <= 200.
  std::vector<Eigen::Index> starts;
  for (Eigen::Index s = 0; s + 20 + 5 <= 200; ++s) starts.push_back(s);
  ASSERT_EQ(t.slice_count(), 176);
  ASSERT_EQ(static_cast<std::size_t>(t.slice_count()), starts.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    for (Eigen::Index j = 0; j < 20; ++j) {
      EXPECT_EQ(t(k, j, 0), a[starts[k] + j]);
      EXPECT_EQ(t(k, j, 1), b[starts[k] + j]);
    }
  }
  EXPECT_EQ(t.slice(3).col(1), b.segment(3, 20));
  EXPECT_EQ(t.channel_index("b"), 1);
}

TEST(MakeSlices, Errors) {
  EXPECT_THROW(make_slices({Eigen::VectorXd::Ones(10)}, spec_of(20, 1, 0)), std::invalid_argument);
  EXPECT_THROW(make_slices({Eigen::VectorXd::Ones(10)}, spec_of(1, 1, 0)), std::invalid_argument);
  EXPECT_THROW(make_slices({Eigen::VectorXd::Ones(30), Eigen::VectorXd::Ones(29)}, spec_of(5, 1, 0, {"a", "b"})),
               std::invalid_argument);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(30, 1, 30);
  EXPECT_THROW(make_slices({sma(c, 5).values}, spec_of(5, 1, 0)), DataError);
}

TEST(MakeSlices, FirstDefinedStartSkipsWarmup) {
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(30, 1, 30);
  const Eigen::VectorXd m = sma(c, 5).values;
  SliceSpec spec = spec_of(5, 1, 0, {"close", "sma5"});
  spec.first_start = first_defined_start({c, m});
  EXPECT_EQ(spec.first_start, 4);
  const SliceTensor t = make_slices({c, m}, spec);
  EXPECT_EQ(t.slice_count(), 22);
  EXPECT_EQ(t.end_indices().front(), 8);
  EXPECT_DOUBLE_EQ(t(0, 0, 1), 3.0);
}

TEST(Flatten, PaperShape) {
  Rng rng(1);
  std::vector<Eigen::VectorXd> ch;
  for (int i = 0; i < 5; ++i) ch.push_back(rng.normal_vector(1019));
  const SliceTensor t = make_slices(ch, spec_of(20, 1, 0, {"a", "b", "c", "d", "e"}));
  EXPECT_EQ(t.slice_count(), 1000);
  const Eigen::MatrixXd f = flatten(t);
  EXPECT_EQ(f.rows(), 1000);
  EXPECT_EQ(f.cols(), 100);
}

TEST(Flatten, RowsAreWindows) {
  Eigen::VectorXd x(4);
  x << 10, 20, 30, 40;
  const Eigen::MatrixXd f = flatten(make_slices({x}, spec_of(2, 1, 0)));
  Eigen::MatrixXd expected(3, 2);
  expected << 10, 20, 20, 30, 30, 40;
  EXPECT_EQ(f, expected);
}

TEST(Flatten, RoundTrip) {
  Rng rng(2);
  const Eigen::VectorXd a = rng.normal_vector(60), b = rng.normal_vector(60);
  const SliceTensor t = make_slices({a, b}, spec_of(7, 3, 2, {"a", "b"}));
  const SliceTensor u = unflatten(flatten(t), 7, 2, t.end_indices(), t.channel_names());
  EXPECT_EQ(u.data(), t.data());
  EXPECT_EQ(u.end_indices(), t.end_indices());
  EXPECT_THROW(unflatten(flatten(t), 5, 2), std::invalid_argument);
}

TEST(Overlap, Fractions) {
  const SliceSpec s = spec_of(20, 1, 0);
  EXPECT_DOUBLE_EQ(slice_overlap_fraction(4, 5, s), 0.95);
  EXPECT_DOUBLE_EQ(slice_overlap_fraction(5, 5, s), 1.0);
  EXPECT_DOUBLE_EQ(slice_overlap_fraction(0, 20, s), 0.0);
  EXPECT_DOUBLE_EQ(slice_overlap_fraction(0, 25, s), 0.0);
  EXPECT_DOUBLE_EQ(slice_overlap_fraction(0, 2, spec_of(20, 5, 0)), 0.5);
  EXPECT_THROW(slice_overlap_fraction(0, 10, s, 5), std::invalid_argument);
}

TEST(TensorIo, BlobRoundTripAndLayout) {
  Rng rng(6);
  const Eigen::VectorXd a = rng.normal_vector(40), b = rng.normal_vector(40);
  SliceSpec spec = spec_of(5, 2, 1, {"a", "b"});
  const SliceTensor t = scale_slices(make_slices({a, b}, spec), default_scaler_config(spec.channels, ScaleMethod::minmax));
  const auto dir = std::filesystem::temp_directory_path() / "tslab_tensor_io";
  std::filesystem::remove_all(dir);
  const auto files = write_tensor(dir, "t", t);
  ASSERT_EQ(files.size(), 2u);

  // Blob is (m, s, i) row-major little-endian float64.
  std::ifstream in(dir / "t.bin", std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), static_cast<std::size_t>(t.slice_count() * 5 * 2 * 8));
  double v;
  std::memcpy(&v, bytes.data() + 8 * (1 * 10 + 3 * 2 + 1), 8);
  EXPECT_EQ(v, t(1, 3, 1));

  const SliceTensor back = read_tensor(dir / "t.json");
  EXPECT_EQ(back.data(), t.data());
  EXPECT_EQ(back.channel_names(), t.channel_names());
  EXPECT_EQ(back.end_indices(), t.end_indices());
  ASSERT_TRUE(back.scaling());
  const SliceTensor inv = invert_scaling(back);
  EXPECT_LT((inv.data() - make_slices({a, b}, spec).data()).cwiseAbs().maxCoeff(), 1e-12);

  std::filesystem::resize_file(dir / "t.bin", 16);
  EXPECT_THROW(read_tensor(dir / "t.json"), DataError);
}

TEST(TensorIo, FlatCsvHeader) {
  Eigen::VectorXd x(4);
  x << 1, 2, 3, 4;
  const auto path = std::filesystem::temp_directory_path() / "tslab_flat.csv";
  write_flat_csv(path, make_slices({x}, spec_of(2, 1, 0, {"close"})));
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "end_index,close_t0,close_t1");
  EXPECT_EQ(row, "1,1,2");
}
