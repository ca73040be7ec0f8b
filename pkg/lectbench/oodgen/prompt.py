"""
File: prompt.py
Description: Four-step reasoning prompt asking a language model for the text
of a pseudo-OOD node.
"""

SYSTEM_MESSAGE = ("You help build out-of-distribution samples for a node "
                  "classification benchmark on a text-attributed graph. "
                  "Answer every question, and end each answer with a "
                  "single line holding only the requested result.")

DISTANCE_INSTRUCTION = {
    'near': "close to",
    'far': "far from",
}


class CotPrompt(object):
    """System message and the four user turns of one conversation.

    Attributes:
        system (str): The system message.
        steps (tuple): of 4 str, in order: domain classification, OOD
            category selection, neighbor label analysis, sample generation.
        mode (str): 'near' or 'far'.

    """
    def __init__(self, system, steps, mode):
        if len(steps) != 4:
            raise ValueError("A reasoning prompt has exactly 4 steps")
        self.system = system
        self.steps = tuple(steps)
        self.mode = mode

    def messages(self, answers=()):
        """Chat history: system message, then the user turns interleaved
        with the assistant answers received so far, ending on the next user
        turn."""
        history = [{'role': 'system', 'content': self.system}]
        for step, answer in zip(self.steps, answers):
            history.append({'role': 'user', 'content': step})
            history.append({'role': 'assistant', 'content': answer})
        history.append({'role': 'user', 'content': self.steps[len(answers)]})
        return history

    def to_dict(self):
        return {'system': self.system, 'steps': list(self.steps),
                'mode': self.mode}


def build_cot_prompt(ind_class_names, neighbor_labels, mode):
    """Build the reasoning prompt of a pseudo node.

    Step 1 lists every IND class and asks for the main domain. Step 2 asks
    for a category close to (near) or far from (far) that domain, excluding
    the IND classes. Step 3 gives only the labels of the connected IND nodes
    and asks for an OOD label correlated with them. Step 4 asks for a short
    node description of the chosen category.

    Args:
        ind_class_names (list): of str, names of the IND classes.
        neighbor_labels (list): of str, class names of the IND neighbors of
            the pseudo node.
        mode (str): 'near' or 'far'.

    Returns:
        CotPrompt

    Raises:
        ValueError: on an empty class or neighbor list, on neighbor labels
            that are not IND classes, or on an unknown mode.

    """
    ind_class_names = list(ind_class_names)
    neighbor_labels = list(neighbor_labels)
    if not ind_class_names:
        raise ValueError("The IND class names cannot be empty")
    if not neighbor_labels:
        raise ValueError("A pseudo node has at least one neighbor label")
    unknown = sorted(set(neighbor_labels) - set(ind_class_names))
    if unknown:
        raise ValueError("Neighbor labels {} are not IND classes".format(
            unknown))
    if mode not in DISTANCE_INSTRUCTION:
        raise ValueError("Unknown generation mode {}".format(mode))

    classes = ", ".join('"{}"'.format(name) for name in ind_class_names)
    neighbors = ", ".join('"{}"'.format(name) for name in
                          sorted(set(neighbor_labels)))
    steps = [
        ("The nodes of the graph belong to the following categories: {}. "
         "Which main domain do these categories belong to?".format(classes)),
        ("Propose a category that is {} this main domain and that is not "
         "one of the categories {}.".format(DISTANCE_INSTRUCTION[mode],
                                            classes)),
        ("The new sample is connected to nodes labelled {}. Taking these "
         "labels into account, give the out-of-distribution label of the "
         "new sample, correlated with them.".format(neighbors)),
        ("Write a short description, two or three sentences, of a node "
         "of this out-of-distribution category, in the style of the node "
         "texts of the graph."),
    ]
    return CotPrompt(SYSTEM_MESSAGE, steps, mode)


def last_line(answer):
    """Last non-empty line of an answer, stripped of quotes."""
    lines = [line.strip() for line in answer.splitlines() if line.strip()]
    if not lines:
        return ''
    return lines[-1].strip('"\'')
