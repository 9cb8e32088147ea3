"""Graph-to-text reasoning pipeline: linearization, prompts, parsing, rewards,
GRPO math, corpus curation and zero-shot evaluation."""

__version__ = "0.1.0"

from .errors import CurationError, GraphReasonError, InputError, StateError, TransportError
from .graph import Edge, Subgraph, TextGraph, extract_khop, is_trivial, load_graph, relabel_local, whole_graph
from .linearize import LinearizedGraph, describe_edges, describe_nodes, linearize, parse_edge_block, summarize_node
from .prompts import PromptBundle, TaskInstance, TaskKind, Variant, build_prompt, iter_instances, sample_label_subset
from .parsing import ParsedResponse, check_format, extract_candidates, parse_response
from .rewards import match_answer, reward, reward_normal, reward_rethink
from .grpo import (
    GroupSample,
    ScoredResponse,
    group_advantages,
    grpo_objective,
    importance_ratio,
    kl_estimate,
    sft_loss,
)
from .client import ClientConfig, HTTPChatClient, MockChatClient, ReplayChatClient, chat_complete
from .curator import CurationConfig, CurationRecord, build_corpus, generate_trace
from .evaluator import EvalConfig, EvalReport, eval_run, score_classification, score_regression
