# -*- coding: utf-8 -*-

from __future__ import annotations

import re
from typing import Dict, List, Tuple

from synforge.errors import AstError
from synforge.grammar.grammar import NodeKind, NodeType
from synforge.tree.ast import AstNode

RECIPE = re.compile(r"^\s*IF\s+(\w+)\.(\w+)\s+THEN\s+(\w+)\.(\w+)\s*$")

# channel -> functions it offers, used by the fixture generator
TRIGGERS: Dict[str, Tuple[str, ...]] = {
    "Instagram": ("AnyNewPhotoByYou", "NewPhotoByYouWithSpecificHashtag"),
    "Weather": ("TomorrowsForecastCallsFor", "CurrentTemperatureDropsBelow"),
    "Gmail": ("AnyNewEmailInInbox", "NewEmailFromSearch"),
    "Twitter": ("NewTweetByYou", "NewFollower"),
    "Facebook": ("NewPhotoPostByYou", "NewStatusMessageByYou"),
    "Feed": ("NewFeedItem",),
}
ACTIONS: Dict[str, Tuple[str, ...]] = {
    "Dropbox": ("AddFileFromURL", "AppendToTextFile"),
    "Twitter": ("PostATweet", "PostATweetWithImage"),
    "Email": ("SendMeAnEmail",),
    "SMS": ("SendMeAnSMS",),
    "GoogleDrive": ("UploadFileFromURL", "AddRowToSpreadsheet"),
    "Evernote": ("CreateANote", "AppendToNote"),
    "Hue": ("TurnOnLights", "BlinkLights"),
}


def _leaf(holder: str, label: str, value: str) -> AstNode:
    op = AstNode.operation(NodeType(value, NodeKind.OPERATION), label="name")
    return AstNode.nonterminal(NodeType(holder), [op], label=label)


def recipe(trigger_channel: str, trigger_function: str, action_channel: str, action_function: str) -> AstNode:
    trigger = AstNode.nonterminal(NodeType("trigger"), [
        _leaf("trigger_channel", "channel", trigger_channel),
        _leaf("trigger_function", "function", trigger_function),
    ], label="if")
    action = AstNode.nonterminal(NodeType("action"), [
        _leaf("action_channel", "channel", action_channel),
        _leaf("action_function", "function", action_function),
    ], label="then")
    return AstNode.nonterminal(NodeType("root"), [trigger, action])


def _leaf_name(node: AstNode) -> str:
    return node.children[0].type.name


def recipe_parts(ast: AstNode) -> Tuple[str, str, str, str]:
    """(trigger channel, trigger function, action channel, action function) of a recipe tree."""
    trigger, action = ast.children
    return (_leaf_name(trigger.children[0]), _leaf_name(trigger.children[1]),
            _leaf_name(action.children[0]), _leaf_name(action.children[1]))


def render(ast: AstNode) -> str:
    tc, tf, ac, af = recipe_parts(ast)
    return f"IF {tc}.{tf} THEN {ac}.{af}"


def parse(code: str) -> AstNode:
    match = RECIPE.match(code)
    if match is None:
        raise AstError("expected 'IF <Channel>.<Function> THEN <Channel>.<Function>'", 1)
    return recipe(*match.groups())


def tokenize_code(code: str) -> List[str]:
    return re.findall(r"\w+|[^\w\s]", code)
