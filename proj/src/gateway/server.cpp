#include "ppcm/server.hpp"

#include <charconv>
#include <csignal>
#include <deque>
#include <iostream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "ppcm/errors.hpp"
#include "ppcm/protocol.hpp"

namespace ppcm {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

Endpoint parse_endpoint(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0) throw InvalidInput("bind address must be host:port, got '" + text + "'");
    Endpoint e;
    e.host = text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
        throw InvalidInput("bad port in bind address '" + text + "'");
    }
    e.port = static_cast<unsigned short>(value);
    return e;
}

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, SessionHub& hub) : ws_(std::move(socket)), hub_(hub) {}

    void run() {
        ws_.text(true);
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            std::weak_ptr<WsSession> weak = self;
            auto executor = self->ws_.get_executor();
            self->id_ = self->hub_.open_session([weak, executor] {
                asio::post(executor, [weak] {
                    if (auto s = weak.lock()) s->flush();
                });
            });
            self->open_ = true;
            self->read();
        });
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->hub_.handle(self->id_, text);
            self->read();
        });
    }

    // Pulls output only when idle, so a slow reader keeps overwriting its
    // snapshot slot instead of growing a queue.
    void flush() {
        if (!open_ || writing_) return;
        if (outbox_.empty()) {
            for (auto& m : hub_.take(id_)) outbox_.push_back(std::move(m));
        }
        if (outbox_.empty()) return;
        writing_ = true;
        ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->writing_ = false;
            self->outbox_.pop_front();
            if (ec) {
                self->close();
                return;
            }
            self->flush();
        });
    }

    void close() {
        if (!open_) return;
        open_ = false;
        hub_.close_session(id_);
    }

    websocket::stream<tcp::socket> ws_;
    SessionHub& hub_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    SessionId id_ = 0;
    bool open_ = false;
    bool writing_ = false;
};

}  // namespace

struct GatewayServer::Impl {
    explicit Impl(AppConfig config)
        : hub(queue, config.protocol), service(std::move(config), hub, queue), acceptor(ioc) {}

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<WsSession>(std::move(socket), hub)->run();
            accept();
        });
    }

    CommandQueue queue;
    SessionHub hub;
    SimulationService service;
    asio::io_context ioc;
    tcp::acceptor acceptor;
    std::thread io_thread;
};

GatewayServer::GatewayServer(AppConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

GatewayServer::~GatewayServer() { stop(); }

unsigned short GatewayServer::start(const Endpoint& endpoint) {
    beast::error_code ec;
    const auto address = asio::ip::make_address(endpoint.host, ec);
    if (ec) throw InvalidInput("bad bind host '" + endpoint.host + "'");
    const tcp::endpoint ep(address, endpoint.port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep, ec);
    if (ec) throw InvalidInput("cannot bind " + endpoint.host + ":" + std::to_string(endpoint.port) + ": " + ec.message());
    impl_->acceptor.listen();
    impl_->accept();
    impl_->service.start();
    impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
    return impl_->acceptor.local_endpoint().port();
}

void GatewayServer::stop() {
    if (!impl_) return;
    impl_->service.stop();
    impl_->ioc.stop();
    if (impl_->io_thread.joinable()) impl_->io_thread.join();
}

int run_server(const AppConfig& config, const std::string& bind) {
    GatewayServer server(config);
    const unsigned short port = server.start(parse_endpoint(bind));
    std::cout << "serving on " << parse_endpoint(bind).host << ':' << port << std::endl;
    asio::io_context signals_ioc;
    asio::signal_set signals(signals_ioc, SIGINT, SIGTERM);
    signals.async_wait([](beast::error_code, int) {});
    signals_ioc.run();
    server.stop();
    return 0;
}

}  // namespace ppcm
