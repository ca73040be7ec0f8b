from .edges import init_pseudo_edges, default_num_pseudo, pseudo_modes, resolve_counts
from .prompt import CotPrompt, build_cot_prompt, last_line
from .generators import (TextGenerator, TemplateGenerator, RandomTextGenerator, RemoteLLMGenerator,
                         GeneratedText, build_generator, detect_domain)
from .batch import (PseudoOodSkeleton, PseudoOodBatch, build_skeleton, generate_texts, with_texts,
                    augment_graph)
