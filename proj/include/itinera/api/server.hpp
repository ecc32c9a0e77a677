#pragma once

#include "itinera/api/service.hpp"

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace itinera::api {

/// JSON routes over a Service. Errors use one envelope: {"code", "message", "detail"}.
class ApiServer {
public:
    explicit ApiServer(Service& service);
    ~ApiServer();

    /// Blocks until stop(). Returns false when the address cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port on `host` and returns it; serve with listen_after_bind().
    int bind_any(const std::string& host);
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    void routes();

    Service& service_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace itinera::api
