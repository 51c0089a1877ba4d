#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"

namespace gsnprobe::cli {

namespace {

struct ServeOptions {
  BackendOptions backend;
  std::size_t length = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeOptions& o) {
  BackendOptions bo = o.backend;
  if (o.length > 0) bo.length = o.length;
  const Backend backend = open_backend(bo);
  remote::ProtocolServer server(*backend.model, backend.model->fingerprint());
  std::cout << "serving " << backend.model->fingerprint() << " on http://" << o.host << ':' << o.port
            << std::endl;
  server.serve_forever(o.host, o.port);
  return kOk;
}

}  // namespace

void register_serve_stub(CLI::App& app, Action& action) {
  auto o = std::make_shared<ServeOptions>();
  auto* sub = app.add_subcommand("serve-stub", "Serve a local backend over the conditional protocol");
  add_backend_flags(sub, o->backend);
  sub->add_option("--length", o->length, "Sequence length");
  sub->add_option("--host", o->host)->capture_default_str();
  sub->add_option("--port", o->port)->capture_default_str();
  sub->callback([o, &action] { action = [o] { return run_serve(*o); }; });
}

}  // namespace gsnprobe::cli
