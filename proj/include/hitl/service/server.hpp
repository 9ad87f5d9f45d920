#pragma once

// Live TCP service: one client drives one session over line-delimited JSON.
//
// Client -> server, one object per line:
//   {"kind":"device_event","body":{"type":"press"}}              (or release,
//       cycle, select, frame with "v")
//   {"kind":"utterance","body":{"text":"Echo, tell the robot Back"}}
//   {"kind":"control","body":{"op":"end"}}                       ends the session
// An optional numeric "client_t" is recorded in the trace, but inputs are
// ordered by the server's own receipt time.
//
// Server -> client:
//   {"kind":"snapshot","body":{...}}   after every state change
//   {"kind":"error","body":{"message":"..."}}
//
// A second concurrent client gets an error line and is disconnected. When the
// client leaves, the session is finished and its trace written.

#include "hitl/service/session.hpp"

#include <boost/asio.hpp>

#include <functional>
#include <memory>
#include <string>

namespace hitl::service {

struct ServeOptions {
  std::uint16_t port = 0;  // 0 picks a free port
  SessionConfig session;
  std::string trace_dir = ".";
  // Session clock in seconds since the client connected. Defaults to the
  // steady clock; tests substitute a manual one.
  std::function<double()> clock;
  int target_trials = 4;  // trials that make a session complete
};

struct ClientMessage {
  std::optional<DeviceInput> input;  // empty for the end-of-session control
  std::optional<double> client_t;
};

// Throws InputError on anything malformed.
ClientMessage parse_client_message(const std::string& line);

class Server {
 public:
  Server(boost::asio::io_context& io, ServeOptions options);
  ~Server();

  std::uint16_t port() const;
  // Closes the listener and any client, finishing the live session.
  void stop();
  // Path of the last trace written, empty before the first session ends.
  const std::string& last_trace_path() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace hitl::service
