#include "edgestream/agent.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <thread>

#include "edgestream/gateway.hpp"
#include "edgestream/png_io.hpp"

using namespace edgestream;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_noisy_png(const fs::path& path, std::uint64_t seed, std::size_t side = 64) {
  // Sub-threshold noise everywhere: incompressible until the fill flattens
  // it, so the operator always achieves a strict size reduction.
  GrayImage img{side, side, std::vector<std::uint8_t>(side * side)};
  std::mt19937_64 rng(seed);
  for (std::uint8_t& p : img.pixels) p = static_cast<std::uint8_t>(rng() % 30);
  write_gray_png(path, img);
}

// Replays a trace and asserts the upload-side inverse-priority rule: an
// unprocessed document may only start uploading while no processed document
// sits in the queue.
void assert_processed_uploaded_first(const std::vector<TraceEvent>& trace) {
  std::map<std::uint32_t, DocumentState> state;
  for (const TraceEvent& ev : trace) {
    switch (ev.kind) {
      case TraceKind::Arrive: state[ev.doc_index] = DocumentState::QueuedUnprocessed; break;
      case TraceKind::ProcStartPrio:
      case TraceKind::ProcStartSearch: state[ev.doc_index] = DocumentState::Processing; break;
      case TraceKind::ProcEnd: state[ev.doc_index] = DocumentState::QueuedProcessed; break;
      case TraceKind::UploadStart: {
        if (state[ev.doc_index] == DocumentState::QueuedUnprocessed) {
          for (const auto& [other, s] : state) {
            ASSERT_NE(s, DocumentState::QueuedProcessed)
                << "unprocessed doc " << ev.doc_index << " uploaded at t=" << ev.time
                << " while processed doc " << other << " was queued";
          }
        }
        state[ev.doc_index] = DocumentState::Uploading;
        break;
      }
      case TraceKind::UploadEnd: state[ev.doc_index] = DocumentState::Uploaded; break;
    }
  }
}

class AgentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("agent_test_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter_++));
    watch_ = root_ / "watch";
    storage_ = root_ / "storage";
    fs::create_directories(watch_);

    GatewayConfig gw;
    gw.listen_port = 0;
    gw.storage_dir = storage_;
    gateway_ = std::make_unique<Gateway>(gw);
    gateway_->start();
  }

  void TearDown() override {
    gateway_->stop();
    fs::remove_all(root_);
  }

  AgentConfig base_config() {
    AgentConfig config;
    config.watch_dir = watch_;
    config.gateway_url =
        "http://127.0.0.1:" + std::to_string(gateway_->config().listen_port);
    config.stream_id = "t";
    config.poll_interval = 0.05;
    config.retry_backoff = 0.05;
    return config;
  }

  fs::path stored(const std::string& name) const { return storage_ / "t" / name; }

  static int counter_;
  fs::path root_, watch_, storage_;
  std::unique_ptr<Gateway> gateway_;
};

int AgentTest::counter_ = 0;

TEST_F(AgentTest, ProcessesAndUploadsPreexistingFiles) {
  for (int i = 0; i < 6; ++i) {
    write_noisy_png(watch_ / ("frame_" + std::to_string(i) + ".png"), 100 + i);
  }
  AgentConfig config = base_config();
  config.num_process_workers = 1;
  config.num_upload_workers = 2;
  config.expected_documents = 6;
  AgentResult result = Agent(config).run();

  ASSERT_TRUE(result.ok) << result.error;
  EXPECT_EQ(result.documents_uploaded, 6u);
  EXPECT_EQ(gateway_->documents_stored(), 6u);
  EXPECT_NO_THROW(validate_lifecycle(result.trace, 1, 2));
  EXPECT_NO_THROW(validate_complete(result.trace, 1, 2));

  std::map<std::uint32_t, bool> processed;
  for (const TraceEvent& ev : result.trace) {
    if (ev.kind == TraceKind::ProcEnd) processed[ev.doc_index] = true;
  }
  EXPECT_EQ(processed.size(), result.documents_processed);
  for (int i = 0; i < 6; ++i) {
    std::string name = "frame_" + std::to_string(i) + ".png";
    fs::path expected_source =
        processed.count(i) ? watch_ / ".processed" / name : watch_ / name;
    ASSERT_TRUE(fs::exists(stored(std::to_string(i) + ".png"))) << name;
    EXPECT_EQ(read_file(stored(std::to_string(i) + ".png")), read_file(expected_source))
        << name;
  }
}

TEST_F(AgentTest, FilesAppearingDuringRunAreIngested) {
  AgentConfig config = base_config();
  config.expected_documents = 3;
  Agent agent(config);
  std::thread writer([&] {
    for (int i = 0; i < 3; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(120));
      write_noisy_png(watch_ / ("frame_" + std::to_string(i) + ".png"), 200 + i, 32);
    }
  });
  AgentResult result = agent.run();
  writer.join();
  ASSERT_TRUE(result.ok) << result.error;
  EXPECT_EQ(result.documents_uploaded, 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(fs::exists(stored(std::to_string(i) + ".png")));
  }
}

TEST_F(AgentTest, IndexParsedFromFilenameWithFallbackOnCollision) {
  write_noisy_png(watch_ / "frame_7.png", 1, 16);
  write_noisy_png(watch_ / "other_7.png", 2, 16);
  write_noisy_png(watch_ / "alpha.png", 3, 16);
  AgentConfig config = base_config();
  config.process_policy = ProcessPolicy::no_processing();
  config.num_process_workers = 0;
  config.upload_policy = UploadPolicy::fifo();
  config.expected_documents = 3;
  AgentResult result = Agent(config).run();

  ASSERT_TRUE(result.ok) << result.error;
  // Startup batch enters in index order; "frame_7" wins index 7 by name
  // tie-break, "other_7" falls back to 8, digitless "alpha" gets 9.
  EXPECT_EQ(read_file(stored("7.png")), read_file(watch_ / "frame_7.png"));
  EXPECT_EQ(read_file(stored("8.png")), read_file(watch_ / "other_7.png"));
  EXPECT_EQ(read_file(stored("9.png")), read_file(watch_ / "alpha.png"));
}

TEST_F(AgentTest, GrowingFileWaitsForStability) {
  AgentConfig config = base_config();
  config.process_policy = ProcessPolicy::no_processing();
  config.num_process_workers = 0;
  config.poll_interval = 0.06;
  config.expected_documents = 1;
  Agent agent(config);

  std::thread writer([&] {
    // Append faster than the poll cadence so every pair of consecutive
    // scans sees a different size until the writer finishes.
    std::ofstream out(watch_ / "grow_1.bin", std::ios::binary);
    for (int chunk = 0; chunk < 10; ++chunk) {
      out << std::string(1000, static_cast<char>('a' + chunk));
      out.flush();
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
  });
  AgentResult result = agent.run();
  writer.join();

  ASSERT_TRUE(result.ok) << result.error;
  EXPECT_EQ(result.documents_uploaded, 1u);
  EXPECT_EQ(read_file(stored("1.bin")), read_file(watch_ / "grow_1.bin"));
  EXPECT_EQ(fs::file_size(stored("1.bin")), 10'000u);
}

TEST_F(AgentTest, OperatorFailureFallsBackToOriginalUpload) {
  {
    std::ofstream out(watch_ / "broken_2.png", std::ios::binary);
    out << "not a real png at all";
  }
  AgentConfig config = base_config();
  config.expected_documents = 1;
  AgentResult result = Agent(config).run();

  ASSERT_TRUE(result.ok) << result.error;
  EXPECT_EQ(result.documents_uploaded, 1u);
  EXPECT_EQ(result.documents_processed, 0u);
  EXPECT_EQ(read_file(stored("2.png")), "not a real png at all");
  // The aborted claim leaves no processing events behind.
  for (const TraceEvent& ev : result.trace) {
    EXPECT_TRUE(ev.kind == TraceKind::Arrive || ev.kind == TraceKind::UploadStart ||
                ev.kind == TraceKind::UploadEnd);
  }
  EXPECT_NO_THROW(validate_complete(result.trace, 1, 4));
}

TEST_F(AgentTest, UnreachableGatewayFailsAfterRetries) {
  write_noisy_png(watch_ / "frame_0.png", 9, 16);
  AgentConfig config = base_config();
  config.gateway_url = "http://127.0.0.1:1";  // nothing listens here
  config.upload_attempts = 2;
  config.retry_backoff = 0.01;
  AgentResult result = Agent(config).run();
  EXPECT_FALSE(result.ok);
  EXPECT_NE(result.error.find("upload failed"), std::string::npos);
}

TEST_F(AgentTest, ProcessedDocumentsUploadBeforeUnprocessedOnes) {
  for (int i = 0; i < 8; ++i) {
    write_noisy_png(watch_ / ("frame_" + std::to_string(i) + ".png"), 300 + i);
  }
  AgentConfig config = base_config();
  config.num_process_workers = 2;
  config.num_upload_workers = 1;
  config.expected_documents = 8;
  AgentResult result = Agent(config).run();
  ASSERT_TRUE(result.ok) << result.error;
  assert_processed_uploaded_first(result.trace);
  EXPECT_NO_THROW(validate_lifecycle(result.trace, 2, 1));
}

TEST_F(AgentTest, StopEndsAnOpenEndedSession) {
  AgentConfig config = base_config();  // no expected_documents
  Agent agent(config);
  std::thread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    agent.stop();
  });
  AgentResult result = agent.run();
  stopper.join();
  EXPECT_TRUE(result.ok) << result.error;
  EXPECT_EQ(result.documents_uploaded, 0u);
}

TEST(AgentConfigTest, Validation) {
  AgentConfig config;
  EXPECT_THROW(config.validate(), std::invalid_argument);  // empty paths
  config.watch_dir = "/tmp/w";
  config.gateway_url = "http://127.0.0.1:1";
  config.num_upload_workers = 0;
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.num_upload_workers = 1;
  config.num_process_workers = 0;  // needs NoProcessing
  EXPECT_THROW(config.validate(), std::invalid_argument);
  config.process_policy = ProcessPolicy::no_processing();
  EXPECT_NO_THROW(config.validate());
}

TEST(IndexFromName, ParsesLastDigitRun) {
  EXPECT_EQ(detail::index_from_name("frame_0123"), 123u);
  EXPECT_EQ(detail::index_from_name("cam2_shot_45"), 45u);
  EXPECT_EQ(detail::index_from_name("7"), 7u);
  EXPECT_EQ(detail::index_from_name("no_digits"), std::nullopt);
  EXPECT_EQ(detail::index_from_name("overflow_99999999999999"), std::nullopt);
}

}  // namespace
