// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "rkd/embedding_io.hpp"
#include "rkd/mlp.hpp"

namespace rkd {
namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "rkd");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) { return testing::temp_path("cli_" + name).string(); }

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    const Result none = run_cli({});
    EXPECT_EQ(none.code, cli::kExitConfig);
    const Result unknown = run_cli({"eval", "--data", "x.rkeb", "--frobnicate"});
    EXPECT_EQ(unknown.code, cli::kExitConfig);
    EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run_cli({"train"}).code, cli::kExitConfig);
}

TEST(Cli, EvalOnClusteredEmbeddings) {
    EmbeddingBatch b{Matrix(8, 2), {0, 0, 1, 1, 2, 2, 3, 3}};
    for (std::size_t i = 0; i < 8; ++i) b.embeddings(i, 0) = static_cast<double>(b.labels[i]) * 10.0;
    write_embeddings(tmp("clustered.rkeb"), b);
    const Result r = run_cli({"eval", "--data", tmp("clustered.rkeb"), "--recall", "1,2,4"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("recall@1 = 1.0000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("recall@4 = 1.0000"), std::string::npos) << r.out;
}

TEST(Cli, DataErrorsExitTwo) {
    std::ofstream(tmp("garbage.rkeb")) << "not an embedding file";
    EXPECT_EQ(run_cli({"eval", "--data", tmp("garbage.rkeb")}).code, cli::kExitData);
    EXPECT_EQ(run_cli({"eval", "--data", tmp("missing.rkeb")}).code, cli::kExitData);
    EmbeddingBatch b{Matrix(3, 2), {0, 1, 0}};
    write_embeddings(tmp("three.rkeb"), b);
    EXPECT_EQ(run_cli({"eval", "--data", tmp("three.rkeb"), "--recall", "4"}).code, cli::kExitData);
    EXPECT_EQ(run_cli({"compare", "--a", tmp("three.rkeb"), "--b", tmp("garbage.rkeb")}).code, cli::kExitData);
}

TEST(Cli, ConfigErrorsExitOne) {
    ASSERT_EQ(run_cli({"gen-data", "--classes", "4", "--per-class", "10", "--dim", "6", "--out", tmp("d.rkeb")}).code, 0);
    EXPECT_EQ(run_cli({"train-teacher", "--data", tmp("d.rkeb"), "--arch", "6,x", "--out", tmp("t.rkdp")}).code,
              cli::kExitConfig);
    EXPECT_EQ(run_cli({"train-teacher", "--data", tmp("d.rkeb"), "--arch", "5,3", "--out", tmp("t.rkdp")}).code,
              cli::kExitConfig);
    EXPECT_EQ(run_cli({"gen-data", "--classes", "0", "--out", tmp("e.rkeb")}).code, cli::kExitConfig);
    std::ofstream(tmp("bad.json")) << R"({"epochs": 2, "mystery": 1})";
    EXPECT_EQ(run_cli({"train-teacher", "--data", tmp("d.rkeb"), "--arch", "6,3", "--config", tmp("bad.json"),
                       "--out", tmp("t.rkdp")})
                  .code,
              cli::kExitConfig);
}

TEST(Cli, FullPipeline) {
    ASSERT_EQ(run_cli({"gen-data", "--classes", "4", "--per-class", "20", "--dim", "8", "--seed", "3", "--out",
                       tmp("train.rkeb")})
                  .code,
              0);
    ASSERT_EQ(run_cli({"gen-data", "--classes", "4", "--per-class", "20", "--dim", "8", "--seed", "3", "--split",
                       "test", "--out", tmp("test.rkeb")})
                  .code,
              0);
    const Result teacher = run_cli({"train-teacher", "--data", tmp("train.rkeb"), "--arch", "8,16,6", "--loss",
                                    "triplet", "--l2norm", "--epochs", "3", "--batch-size", "20", "--per-class",
                                    "5", "--seed", "1", "--out", tmp("teacher.rkdp")});
    ASSERT_EQ(teacher.code, 0) << teacher.err;
    EXPECT_TRUE(load_params(tmp("teacher.rkdp")).spec.l2_normalize);

    const Result student = run_cli({"distill", "--teacher", tmp("teacher.rkdp"), "--data", tmp("train.rkeb"),
                                    "--eval-data", tmp("test.rkeb"), "--student-arch", "8,6,2", "--losses",
                                    "rkd-d=1,rkd-a=2", "--no-l2norm", "--epochs", "3", "--batch-size", "20",
                                    "--per-class", "5", "--out", tmp("student.rkdp"), "--metrics",
                                    tmp("metrics.jsonl")});
    ASSERT_EQ(student.code, 0) << student.err;
    const Model s = load_params(tmp("student.rkdp"));
    EXPECT_FALSE(s.spec.l2_normalize);
    EXPECT_EQ(s.spec.widths, (std::vector<std::size_t>{8, 6, 2}));
    std::ifstream metrics(tmp("metrics.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(metrics, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["epoch"], ++lines);
        EXPECT_TRUE(j["losses"].contains("rkd-d"));
        EXPECT_TRUE(j["losses"].contains("rkd-a"));
        EXPECT_TRUE(j["recall"].contains("1"));
    }
    EXPECT_EQ(lines, 3);

    const Result eval = run_cli({"eval", "--model", tmp("student.rkdp"), "--data", tmp("test.rkeb")});
    ASSERT_EQ(eval.code, 0) << eval.err;
    EXPECT_NE(eval.out.find("recall@8 = "), std::string::npos);

    ASSERT_EQ(run_cli({"embed", "--model", tmp("teacher.rkdp"), "--data", tmp("test.rkeb"), "--out", tmp("te.rkeb")}).code, 0);
    ASSERT_EQ(run_cli({"embed", "--model", tmp("student.rkdp"), "--data", tmp("test.rkeb"), "--out", tmp("se.rkeb")}).code, 0);
    EXPECT_EQ(read_embeddings(tmp("se.rkeb")).dim(), 2u);
    const Result cmp = run_cli({"compare", "--a", tmp("te.rkeb"), "--b", tmp("se.rkeb")});
    ASSERT_EQ(cmp.code, 0) << cmp.err;
    const auto report = nlohmann::json::parse(cmp.out);
    EXPECT_EQ(report["rows_used"], 80);
    EXPECT_GT(report["rkd_distance"].get<double>(), 0.0);

    const Result self = run_cli({"self-distill", "--teacher", tmp("teacher.rkdp"), "--data", tmp("train.rkeb"),
                                 "--generations", "2", "--epochs", "2", "--batch-size", "20", "--per-class", "5",
                                 "--out", tmp("gens")});
    ASSERT_EQ(self.code, 0) << self.err;
    EXPECT_NE(self.out.find("gen 2"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(tmp("gens") + "/gen2.rkdp"));
}

TEST(Cli, ClassificationWithHkd) {
    ASSERT_EQ(run_cli({"gen-data", "--classes", "4", "--per-class", "20", "--dim", "8", "--out", tmp("c.rkeb")}).code, 0);
    const Result teacher = run_cli({"train-teacher", "--data", tmp("c.rkeb"), "--arch", "8,12,6", "--loss", "xent",
                                    "--optimizer", "sgd", "--lr", "0.05", "--epochs", "3", "--batch-size", "20",
                                    "--per-class", "5", "--out", tmp("ct.rkdp")});
    ASSERT_EQ(teacher.code, 0) << teacher.err;
    EXPECT_NE(teacher.out.find("accuracy = "), std::string::npos);
    const Result student = run_cli({"distill", "--teacher", tmp("ct.rkdp"), "--data", tmp("c.rkeb"),
                                    "--student-arch", "8,4", "--losses", "xent=1,hkd=16,rkd-d=25,rkd-a=50",
                                    "--no-l2norm", "--optimizer", "sgd", "--lr", "0.01", "--epochs", "2",
                                    "--batch-size", "20", "--per-class", "5", "--out", tmp("cs.rkdp")});
    ASSERT_EQ(student.code, 0) << student.err;
    EXPECT_EQ(load_params(tmp("cs.rkdp")).spec.classifier_classes, 4u);
    const Result eval = run_cli({"eval", "--model", tmp("cs.rkdp"), "--data", tmp("c.rkeb")});
    EXPECT_NE(eval.out.find("accuracy = "), std::string::npos);
}

} // namespace
} // namespace rkd
