//! HTTP service for the patient chatbot: chat, patient profiles,
//! next-symptom predictions and knowledge-graph queries.
//!
//! Patient events are appended to an fsynced log before any reply is sent
//! (see [`store`]). The knowledge graph is an immutable snapshot swapped
//! atomically by `POST /api/admin/reload`.

pub mod api;
pub mod clock;
pub mod config;
pub mod store;

use std::future::Future;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::http::{header, HeaderValue, Method};
use axum::Router;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use medchat_core::corpus::{load_corpus, CorpusError, CorpusFormat, TextPipeline};
use medchat_core::dialogue::{Chatbot, DialogueError, DialogueResources};
use medchat_core::kg::{read_graph, KgError, KnowledgeGraph, SentenceIndex};
use medchat_core::ner::Gazetteer;

pub use api::{ChatReply, ChatRequest, GraphSummary, Health, PredictionsReply, StartRequest};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::{ConfigError, ServiceConfig};
pub use store::{DurableStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot load graph: {0}")]
    Graph(#[from] KgError),
    #[error("cannot load evidence corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Graph plus the sentence text its evidence refers to.
pub struct GraphSnapshot {
    pub graph: KnowledgeGraph,
    pub evidence: Option<SentenceIndex>,
}

impl GraphSnapshot {
    pub fn load(graph_path: Option<&Path>, corpus_path: Option<&Path>) -> Result<Self, ServiceError> {
        let graph = match graph_path {
            Some(p) => read_graph(p)?,
            None => KnowledgeGraph::new(),
        };
        let evidence = match corpus_path {
            Some(p) => {
                let format = if p.is_dir() {
                    CorpusFormat::MetadataCsvJsonDir
                } else {
                    CorpusFormat::Jsonl
                };
                let docs = load_corpus(p, format)?.documents;
                Some(SentenceIndex::from_documents(&docs, &TextPipeline::default()))
            }
            None => None,
        };
        Ok(GraphSnapshot { graph, evidence })
    }

    pub fn summary(&self) -> GraphSummary {
        GraphSummary {
            nodes: self.graph.node_count(),
            cooccurrence_edges: self.graph.cooccurrence_count(),
            semantic_edges: self.graph.semantic_edges().count(),
            attribute_edges: self.graph.attribute_edges().count(),
            evidence_sentences: self.evidence.is_some(),
        }
    }
}

/// Shared state behind every handler.
pub struct App {
    pub config: ServiceConfig,
    pub bot: Chatbot,
    pub store: DurableStore,
    pub clock: Arc<dyn Clock>,
    graph: RwLock<Arc<GraphSnapshot>>,
}

impl App {
    pub fn new(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let bot = Chatbot::new(Gazetteer::bundled(), DialogueResources::bundled(), config.dialogue())?;
        let store = DurableStore::open(&config.data_dir, config.session_gap(), config.compact_every)?;
        let graph = GraphSnapshot::load(config.graph_path.as_deref(), config.corpus_path.as_deref())?;
        Ok(App {
            config,
            bot,
            store,
            clock,
            graph: RwLock::new(Arc::new(graph)),
        })
    }

    pub fn graph(&self) -> Arc<GraphSnapshot> {
        self.graph.read().unwrap().clone()
    }

    /// Rebuilds the snapshot from the configured files. The old snapshot
    /// stays in place if loading fails.
    pub fn reload_graph(&self) -> Result<GraphSummary, ServiceError> {
        let fresh = GraphSnapshot::load(self.config.graph_path.as_deref(), self.config.corpus_path.as_deref())?;
        let summary = fresh.summary();
        *self.graph.write().unwrap() = Arc::new(fresh);
        tracing::info!(nodes = summary.nodes, "graph reloaded");
        Ok(summary)
    }
}

/// Full router: API routes, optional CORS and static UI assets.
pub fn router(app: Arc<App>) -> Result<Router, ServiceError> {
    let mut router = api::routes();
    if let Some(dir) = &app.config.static_dir {
        router = router.fallback_service(ServeDir::new(dir));
    }
    if let Some(origin) = &app.config.cors_origin {
        let origin: HeaderValue = origin
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("cors_origin {origin:?} is not a valid header value")))?;
        router = router.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST])
                .allow_headers([header::CONTENT_TYPE]),
        );
    }
    Ok(router.with_state(app))
}

/// A bound, not yet running server.
pub struct Server {
    listener: tokio::net::TcpListener,
    router: Router,
    app: Arc<App>,
}

impl Server {
    pub async fn bind(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let addr = format!("{}:{}", config.host, config.port);
        let app = Arc::new(tokio::task::block_in_place(|| App::new(config, clock))?);
        let router = router(app.clone())?;
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|source| ServiceError::Bind { addr, source })?;
        Ok(Server { listener, router, app })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, ServiceError> {
        Ok(self.listener.local_addr()?)
    }

    pub fn app(&self) -> Arc<App> {
        self.app.clone()
    }

    /// Serves until `shutdown` resolves, then compacts the patient store.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), ServiceError> {
        axum::serve(self.listener, self.router)
            .with_graceful_shutdown(shutdown)
            .await?;
        let app = self.app;
        tokio::task::spawn_blocking(move || app.store.compact())
            .await
            .map_err(std::io::Error::other)??;
        Ok(())
    }
}
