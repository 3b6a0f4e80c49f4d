#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include <csi2dig/analysis.hpp>
#include <csi2dig/csv_io.hpp>
#include <csi2dig/synth.hpp>

using namespace csi2dig;

TEST_CASE("same seed yields a bit-identical stream") {
  SynthSpec spec;
  spec.num_classes = 3;
  spec.subcarriers = 8;
  spec.repetitions = 2;
  spec.seed = 42;
  SynthOutput a = generate(spec);
  SynthOutput b = generate(spec);
  REQUIRE(a.sequence.frames.size() == b.sequence.frames.size());
  CHECK(a.window_labels == b.window_labels);
  for (size_t i = 0; i < a.sequence.frames.size(); ++i) {
    CHECK(a.sequence.frames[i].timestamp_us == b.sequence.frames[i].timestamp_us);
    CHECK(a.sequence.frames[i].amplitudes == b.sequence.frames[i].amplitudes);
  }
}

TEST_CASE("noise draws do not perturb the stream structure") {
  SynthSpec quiet;
  quiet.num_classes = 3;
  quiet.subcarriers = 8;
  quiet.repetitions = 2;
  quiet.seed = 43;
  quiet.noise_sigma = 0.0;
  SynthSpec noisy = quiet;
  noisy.noise_sigma = 0.4;
  SynthOutput a = generate(quiet);
  SynthOutput b = generate(noisy);
  REQUIRE(a.sequence.frames.size() == b.sequence.frames.size());
  for (size_t i = 0; i < a.sequence.frames.size(); ++i)
    CHECK(a.sequence.frames[i].timestamp_us == b.sequence.frames[i].timestamp_us);
}

namespace {

// frames of generator window w, as row vectors
std::vector<std::vector<double>> window_rows(const SynthOutput& out, size_t w,
                                             double window_seconds) {
  int64_t w_us = static_cast<int64_t>(window_seconds * 1e6);
  std::vector<std::vector<double>> rows;
  for (const CsiFrame& f : out.sequence.frames) {
    size_t fw = static_cast<size_t>(f.timestamp_us / w_us);
    if (fw == w) rows.push_back(f.amplitudes);
  }
  return rows;
}

}  // namespace

TEST_CASE("zero-noise same-class windows have unit spatial correlation") {
  SynthSpec spec;
  spec.num_classes = 3;  // two digit classes + silence
  spec.subcarriers = 16;
  spec.repetitions = 2;
  spec.noise_sigma = 0.0;
  spec.drop_probability = 0.0;
  spec.seed = 44;
  SynthOutput out = generate(spec);

  // windows 0 and 3 hold class 0; window 1 holds class 1
  auto w0 = window_rows(out, 0, spec.window_seconds);
  auto w3 = window_rows(out, 3, spec.window_seconds);
  auto w1 = window_rows(out, 1, spec.window_seconds);
  REQUIRE(out.window_labels[0] == 0);
  REQUIRE(out.window_labels[3] == 0);
  REQUIRE(out.window_labels[1] == 1);

  double same = cross_mean_pcc(w0, w3);
  double cross = cross_mean_pcc(w0, w1);
  INFO("same " << same << " cross " << cross);
  CHECK(std::abs(same - 1.0) < 1e-9);
  CHECK(cross < same - 1e-6);
}

TEST_CASE("heavy packet loss discards most windows") {
  SynthSpec spec;
  spec.num_classes = 4;
  spec.subcarriers = 16;
  spec.repetitions = 5;
  spec.drop_probability = 0.6;
  spec.seed = 45;
  SynthOutput out = generate(spec);

  SegmentationConfig seg;
  seg.n_norm = 200;
  auto samples = segment(out.sequence, seg);
  size_t windows = out.window_labels.size();
  INFO(samples.size() << " of " << windows << " windows survive");
  CHECK(samples.size() < windows / 5);
}

TEST_CASE("default fixture yields one labeled sample per generated window") {
  SynthSpec spec;  // defaults: 11 classes, 30 reps, 64 subcarriers
  spec.repetitions = 3;
  spec.seed = 46;
  Dataset ds = make_fixture_dataset(spec);

  CHECK(ds.samples.size() == 33);  // low default drop rate loses no windows
  std::map<int, int> counts;
  for (const Sample& s : ds.samples) {
    CHECK(s.n_rows == 200);
    CHECK(s.n_cols == 56);
    REQUIRE(s.label.has_value());
    counts[*s.label] += 1;
  }
  CHECK(counts.size() == 11);
  for (const auto& [cls, count] : counts) CHECK(count == 3);
  CHECK(ds.class_names.size() == 11);
}

TEST_CASE("silence-only spec labels everything as silence") {
  SynthSpec spec;
  spec.num_classes = 1;
  spec.subcarriers = 16;
  spec.repetitions = 4;
  spec.seed = 47;
  Dataset ds = make_fixture_dataset(spec);
  for (const Sample& s : ds.samples) CHECK(*s.label == 0);
}

TEST_CASE("class signatures are pairwise non-collinear") {
  SynthSpec spec;
  spec.seed = 48;
  auto sigs = synth_class_signatures(spec);
  REQUIRE(sigs.size() == 10);
  for (size_t i = 0; i < sigs.size(); ++i)
    for (size_t j = i + 1; j < sigs.size(); ++j) {
      double dot = 0, ni = 0, nj = 0;
      for (size_t s = 0; s < sigs[i].size(); ++s) {
        dot += sigs[i][s] * sigs[j][s];
        ni += sigs[i][s] * sigs[i][s];
        nj += sigs[j][s] * sigs[j][s];
      }
      CHECK(std::abs(dot) / std::sqrt(ni * nj) <= 0.6);
    }
}

TEST_CASE("total packet loss raises AllWindowsDropped") {
  SynthSpec spec;
  spec.num_classes = 3;
  spec.subcarriers = 8;
  spec.repetitions = 2;
  spec.drop_probability = 0.9;
  spec.seed = 49;
  CHECK_THROWS_MATCHES(make_fixture_dataset(spec), CsiError,
                       Catch::Matchers::Predicate<CsiError>([](const CsiError& e) {
                         return e.code() == Errc::all_windows_dropped;
                       }));
}

TEST_CASE("generated stream parses back through the CSI file format") {
  SynthSpec spec;
  spec.num_classes = 2;
  spec.subcarriers = 8;
  spec.repetitions = 1;
  spec.seed = 50;
  SynthOutput out = generate(spec);
  CsiSequence back = parse_csi_file(write_csi_file(out.sequence));
  REQUIRE(back.frames.size() == out.sequence.frames.size());
  CHECK(back.frames[5].amplitudes == out.sequence.frames[5].amplitudes);
}
