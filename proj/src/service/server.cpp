#include "hitl/service/server.hpp"

#include "hitl/errors.hpp"

#include <chrono>
#include <deque>
#include <filesystem>
#include <istream>

namespace hitl::service {

namespace asio = boost::asio;
using asio::ip::tcp;
using nlohmann::json;

ClientMessage parse_client_message(const std::string& line) {
  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!msg.is_object() || !msg.contains("kind") || !msg["kind"].is_string()) {
    throw InputError("message needs a string 'kind'");
  }
  if (!msg.contains("body") || !msg["body"].is_object()) throw InputError("message needs an object 'body'");
  ClientMessage out;
  if (msg.contains("client_t")) {
    if (!msg["client_t"].is_number()) throw InputError("'client_t' must be a number");
    out.client_t = msg["client_t"].get<double>();
  }
  const std::string kind = msg["kind"].get<std::string>();
  const json& body = msg["body"];
  if (kind == "device_event") {
    out.input = device_input_from_json(body);
    return out;
  }
  if (kind == "utterance") {
    if (!body.contains("text") || !body["text"].is_string()) throw InputError("utterance needs 'text'");
    out.input = DeviceInput::utterance(body["text"].get<std::string>());
    return out;
  }
  if (kind == "control") {
    if (body.value("op", "") == "end") return out;
    throw InputError("unknown control op");
  }
  throw InputError("unknown message kind '" + kind + "'");
}

namespace {

std::string wire(const char* kind, json body) {
  return jsonl::dump(json{{"kind", kind}, {"body", std::move(body)}}) + "\n";
}

struct Client {
  explicit Client(tcp::socket s) : socket(std::move(s)) {}
  tcp::socket socket;
  asio::streambuf buffer;
  std::deque<std::string> outbox;
  bool writing = false;
  bool closing = false;
};

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
  Impl(asio::io_context& io, ServeOptions options)
      : io(io), opt(std::move(options)), acceptor(io, tcp::endpoint(tcp::v4(), opt.port)), timer(io) {
    bound_port = acceptor.local_endpoint().port();
  }

  asio::io_context& io;
  ServeOptions opt;
  tcp::acceptor acceptor;
  asio::steady_timer timer;
  std::uint16_t bound_port = 0;
  std::shared_ptr<Client> client;
  std::unique_ptr<Session> session;
  std::chrono::steady_clock::time_point t0;
  int sessions_ended = 0;
  std::string last_trace;
  bool stopped = false;

  double now() const {
    if (opt.clock) return opt.clock();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  // Session time never runs backwards even if the clock does.
  double session_time() const { return std::max(now(), session->now()); }

  void accept() {
    acceptor.async_accept([self = shared_from_this()](boost::system::error_code ec, tcp::socket socket) {
      if (ec || self->stopped) return;
      self->on_connect(std::move(socket));
      self->accept();
    });
  }

  void on_connect(tcp::socket socket) {
    auto c = std::make_shared<Client>(std::move(socket));
    if (client) {
      send(c, wire("error", {{"message", "a session is already active"}}));
      c->closing = true;
      return;
    }
    client = c;
    t0 = std::chrono::steady_clock::now();
    session = std::make_unique<Session>(opt.session);
    session->set_observer([this, c](const json& body) { send(c, wire("snapshot", body)); });
    session->start();
    read(c);
    schedule_tick();
  }

  void schedule_tick() {
    timer.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(opt.session.sim.dt)));
    timer.async_wait([self = shared_from_this()](boost::system::error_code ec) {
      if (ec || !self->session) return;
      self->session->advance_to(self->session_time());
      self->schedule_tick();
    });
  }

  void read(const std::shared_ptr<Client>& c) {
    asio::async_read_until(c->socket, c->buffer, '\n',
                           [self = shared_from_this(), c](boost::system::error_code ec, std::size_t) {
                             if (ec) {
                               if (self->client == c) self->end_session();
                               return;
                             }
                             std::istream in(&c->buffer);
                             std::string line;
                             std::getline(in, line);
                             if (!self->on_line(c, line)) return;
                             self->read(c);
                           });
  }

  // Returns false once the session has ended.
  bool on_line(const std::shared_ptr<Client>& c, const std::string& line) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) return true;
    try {
      const auto msg = parse_client_message(line);
      if (!msg.input) {
        end_session();
        return false;
      }
      session->input(session_time(), *msg.input, msg.client_t);
    } catch (const InputError& e) {
      send(c, wire("error", {{"message", e.what()}}));
    }
    return true;
  }

  void send(const std::shared_ptr<Client>& c, std::string line) {
    c->outbox.push_back(std::move(line));
    if (!c->writing) write(c);
  }

  void write(const std::shared_ptr<Client>& c) {
    if (c->outbox.empty()) {
      c->writing = false;
      if (c->closing) close(c);
      return;
    }
    c->writing = true;
    asio::async_write(c->socket, asio::buffer(c->outbox.front()),
                      [self = shared_from_this(), c](boost::system::error_code ec, std::size_t) {
                        if (ec) {
                          c->outbox.clear();
                          c->writing = false;
                          close(c);
                          return;
                        }
                        c->outbox.pop_front();
                        self->write(c);
                      });
  }

  static void close(const std::shared_ptr<Client>& c) {
    boost::system::error_code ignored;
    c->socket.shutdown(tcp::socket::shutdown_both, ignored);
    c->socket.close(ignored);
  }

  void end_session() {
    if (!session) return;
    timer.cancel();
    const bool complete = static_cast<int>(session->pipeline().context().trials.size()) >= opt.target_trials;
    session->finish(session_time(), complete);
    std::filesystem::create_directories(opt.trace_dir);
    last_trace = (std::filesystem::path(opt.trace_dir) / ("session-" + std::to_string(++sessions_ended) + ".jsonl"))
                     .string();
    session->trace().save(last_trace);
    session.reset();
    if (client) {
      client->closing = true;
      if (!client->writing) close(client);
      client.reset();
    }
  }

  void shutdown() {
    stopped = true;
    boost::system::error_code ignored;
    acceptor.close(ignored);
    end_session();
    timer.cancel();
  }
};

Server::Server(asio::io_context& io, ServeOptions options)
    : impl_(std::make_shared<Impl>(io, std::move(options))) {
  impl_->accept();
}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->bound_port; }

void Server::stop() {
  asio::post(impl_->io, [impl = impl_] { impl->shutdown(); });
}

const std::string& Server::last_trace_path() const { return impl_->last_trace; }

}  // namespace hitl::service
