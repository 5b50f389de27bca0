#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>
#include <httplib.h>

#include "quizmaster/server.hpp"
#include "support.hpp"

using namespace quizmaster;
using nlohmann::json;
namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    api_ = std::make_shared<Api>(quizmaster::testing::shipped());
    server_ = std::make_unique<Server>(api_, "127.0.0.1", 0, 2);
    server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", server_->port());
    client_->set_read_timeout(5, 0);
  }
  void TearDown() override {
    client_.reset();
    server_->stop();
  }

  json create(int seed) {
    auto r = client_->Post("/sessions", json{{"seed", seed}}.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 201);
    return json::parse(r->body);
  }

  httplib::Result say(const std::string& id, const std::string& speaker, const std::string& text) {
    return client_->Post("/sessions/" + id + "/utterances", json{{"speaker", speaker}, {"text", text}}.dump(),
                         "application/json");
  }

  std::shared_ptr<Api> api_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<httplib::Client> client_;
};

struct WsClient {
  net::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};

  WsClient(std::uint16_t port, const std::string& target) {
    tcp::resolver resolver(ioc);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", target);
  }

  json read() {
    beast::flat_buffer buffer;
    ws.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }
};

}  // namespace

TEST_F(ServerTest, HttpRoundTrip) {
  auto health = client_->Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

  const auto created = create(4);
  const auto id = created["session_id"].get<std::string>();
  auto r = say(id, "P1", "hmm");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["turn_id"], 1);

  auto state = client_->Get(("/sessions/" + id + "/state").c_str());
  ASSERT_TRUE(state);
  EXPECT_EQ(json::parse(state->body)["phase"], "listening");

  auto missing = client_->Get("/sessions/abc/state");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto bad = say(id, "P9", "hi");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
}

TEST_F(ServerTest, StreamSendsBacklogThenLiveEntries) {
  const auto created = create(6);
  const auto id = created["session_id"].get<std::string>();
  std::vector<std::string> names;
  for (const auto& o : created["question"]["options"]) names.push_back(o["name"].get<std::string>());

  ASSERT_EQ(say(id, "P1", "I'm pretty sure it is not " + names[3])->status, 200);

  WsClient ws(server_->port(), "/sessions/" + id + "/stream");
  EXPECT_EQ(ws.read()["source"], "system");
  EXPECT_EQ(ws.read()["turn_id"], 1);

  say(id, "P2", "Yeah no way it's " + names[3]);
  say(id, "P1", "I would rather go for " + names[0]);
  say(id, "P2", "Sure, let's go for " + names[0]);
  EXPECT_EQ(ws.read()["turn_id"], 2);
  EXPECT_EQ(ws.read()["turn_id"], 3);
  const auto fourth = ws.read();
  EXPECT_EQ(fourth["turn_id"], 4);
  ASSERT_EQ(fourth["actions"].size(), 1u);
  EXPECT_EQ(fourth["actions"][0]["act"], "confirm_answer");
  EXPECT_NE(fourth["actions"][0]["text"].get<std::string>().find(names[0]), std::string::npos);
  ws.ws.close(websocket::close_code::normal);
}

TEST_F(ServerTest, StreamForUnknownSessionIsRejected) {
  EXPECT_THROW(WsClient(server_->port(), "/sessions/0000/stream"), beast::system_error);
}

TEST_F(ServerTest, StopIsIdempotent) {
  server_->stop();
  server_->stop();
  SUCCEED();
}
