#pragma once

// WebSocket front end for the session protocol. One I/O thread serves all
// sessions; the simulation runs on its own fixed-rate thread.

#include <memory>
#include <string>

#include "ppcm/config.hpp"

namespace ppcm {

struct Endpoint {
    std::string host;
    unsigned short port = 0;
};

// "host:port"; throws InvalidInput.
Endpoint parse_endpoint(const std::string& text);

class GatewayServer {
public:
    explicit GatewayServer(AppConfig config);
    ~GatewayServer();

    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    // Binds and starts serving in the background. Port 0 picks a free port;
    // the bound port is returned.
    unsigned short start(const Endpoint& endpoint);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Serves until SIGINT or SIGTERM. Returns a process exit code.
int run_server(const AppConfig& config, const std::string& bind);

}  // namespace ppcm
