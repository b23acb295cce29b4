//! Stateless HTTP service: one POST endpoint per operation, full framework
//! in every request body.

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::api::{handle, ApiError, ErrorClass, Operation};

fn status_for(class: ErrorClass) -> StatusCode {
    match class {
        ErrorClass::BadRequest => StatusCode::BAD_REQUEST,
        ErrorClass::Domain => StatusCode::UNPROCESSABLE_ENTITY,
        ErrorClass::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn error_response(err: ApiError) -> Response {
    (status_for(err.class), Json(err.body())).into_response()
}

async fn dispatch(op: Operation, body: Bytes) -> Response {
    let value: Value = match serde_json::from_slice(&body) {
        Ok(v) => v,
        Err(e) => return error_response(ApiError::bad_request(format!("malformed JSON body: {e}"))),
    };
    match tokio::task::spawn_blocking(move || handle(op, value)).await {
        Ok(Ok(payload)) => Json(payload).into_response(),
        Ok(Err(err)) => error_response(err),
        Err(join) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({"status": "error", "code": "internal", "message": join.to_string()})),
        )
            .into_response(),
    }
}

pub fn router() -> Router {
    let mut router = Router::new().route("/api/health", get(|| async { Json(json!({"status": "ok"})) }));
    for op in Operation::ALL {
        router = router.route(op.path(), post(move |body: Bytes| dispatch(op, body)));
    }
    router
}

pub async fn serve_on(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

pub async fn serve(port: u16) -> std::io::Result<()> {
    let listener = TcpListener::bind(("127.0.0.1", port)).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    serve_on(listener).await
}
