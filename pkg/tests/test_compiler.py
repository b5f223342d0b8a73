import pytest

from polyie.compiler import (
    CodePrompt,
    InvalidInstanceError,
    compile_prompt,
    prompt_length,
    render_gold_output,
)
from polyie.model import (
    Dialect,
    Entity,
    LabelDescriptor,
    LabelSchema,
    PromptStyle,
    TaskInstance,
    TaskKind,
)

from conftest import make_corpus, make_schema

GOLDEN_PY_FUNCTION = '''def Named_Entity_Recognition(InputText):
    """
    Task Definition:
    Find all named entities mentioned in the input text and classify each one.
    Label Set:
    - PERSON: People, including fictional characters.
    - ORG: Companies, agencies and institutions.
    """
    return EntityList

InputText = "Obama visited Google"
Named_Entity_Recognition(InputText)
EntityList = '''


class TestFunctionPrompt:
    def test_golden_py(self, ner_schema, ner_instance):
        p = compile_prompt(ner_instance, ner_schema, Dialect.PY, PromptStyle.FUNCTION)
        assert p.text == GOLDEN_PY_FUNCTION

    def test_structure_markers(self, ner_schema, ner_instance):
        p = compile_prompt(ner_instance, ner_schema, Dialect.PY, PromptStyle.FUNCTION)
        assert "def Named_Entity_Recognition(InputText):" in p.text
        assert "Task Definition:" in p.text
        assert "Label Set:" in p.text
        assert p.text.index("- PERSON:") < p.text.index("- ORG:")
        assert "return EntityList" in p.text
        assert 'InputText = "Obama visited Google"' in p.text
        assert p.text.endswith("EntityList = ")

    def test_boundary_is_text_length(self, ner_schema, ner_instance):
        for dialect in Dialect:
            for style in PromptStyle:
                p = compile_prompt(ner_instance, ner_schema, dialect, style)
                assert p.boundary == len(p.text)

    def test_no_virtual_run_omits_call(self, ner_schema, ner_instance):
        full = compile_prompt(ner_instance, ner_schema, Dialect.PY, PromptStyle.FUNCTION)
        bare = compile_prompt(
            ner_instance, ner_schema, Dialect.PY, PromptStyle.FUNCTION_NO_VIRTUAL_RUN
        )
        assert "Named_Entity_Recognition(InputText)\n" in full.text
        assert "\nNamed_Entity_Recognition(InputText)\n" not in bare.text
        assert 'InputText = "Obama visited Google"' in bare.text
        assert bare.text.endswith("EntityList = ")

    def test_result_prefixes(self, ner_schema, ner_instance):
        cpp = compile_prompt(ner_instance, ner_schema, Dialect.CPP, PromptStyle.FUNCTION)
        java = compile_prompt(ner_instance, ner_schema, Dialect.JAVA, PromptStyle.FUNCTION)
        assert cpp.text.endswith("std::vector<Entity> EntityList = ")
        assert java.text.endswith("List<Entity> EntityList = ")

    @pytest.mark.parametrize(
        "kind,result", [
            (TaskKind.NER, "EntityList"),
            (TaskKind.RE, "RelationList"),
            (TaskKind.EE, "EventList"),
            (TaskKind.EAE, "ArgumentList"),
        ],
    )
    def test_result_names_per_kind(self, kind, result):
        schema, instances = make_corpus(kind, 1, seed=11)
        p = compile_prompt(instances[0], schema, Dialect.PY, PromptStyle.FUNCTION)
        assert p.text.endswith(f"{result} = ")

    def test_rejects_invalid_instance(self, ner_schema):
        bad = TaskInstance("x", "some text", frozenset({Entity("absent", "PERSON")}))
        with pytest.raises(InvalidInstanceError):
            compile_prompt(bad, ner_schema, Dialect.PY, PromptStyle.FUNCTION)


class TestClassPrompt:
    def test_py_scaffolding(self, ner_schema, ner_instance):
        p = compile_prompt(ner_instance, ner_schema, Dialect.PY, PromptStyle.CLASS)
        assert "class Entity:" in p.text
        assert "def __init__" in p.text
        assert "self.name = name" in p.text
        assert "class PERSON(Entity):" in p.text
        assert "class ORG(Entity):" in p.text
        assert p.text.endswith("EntityList = ")

    def test_descriptions_repeated_per_subclass(self, ner_schema, ner_instance):
        p = compile_prompt(ner_instance, ner_schema, Dialect.PY, PromptStyle.CLASS)
        assert "- PERSON: People, including fictional characters." in p.text
        assert "- ORG: Companies, agencies and institutions." in p.text

    def test_cpp_java_inheritance(self, ner_schema, ner_instance):
        cpp = compile_prompt(ner_instance, ner_schema, Dialect.CPP, PromptStyle.CLASS)
        java = compile_prompt(ner_instance, ner_schema, Dialect.JAVA, PromptStyle.CLASS)
        assert "class PERSON : public Entity {" in cpp.text
        assert "class PERSON extends Entity {" in java.text


class TestCrossDialectConsistency:
    @pytest.mark.parametrize("kind", list(TaskKind))
    @pytest.mark.parametrize("style", list(PromptStyle))
    def test_shared_text_blocks(self, kind, style):
        schema, instances = make_corpus(kind, 5, seed=5)
        for inst in instances:
            prompts = [compile_prompt(inst, schema, d, style).text for d in Dialect]
            for text in prompts:
                assert schema.task_definition in text
                assert inst.text in text  # fixture text needs no escaping
                for lb in schema.labels:
                    assert f"- {lb.name}: {lb.description}" in text

    def test_determinism(self, ner_schema, ner_instance):
        a = compile_prompt(ner_instance, ner_schema, Dialect.CPP, PromptStyle.CLASS)
        b = compile_prompt(ner_instance, ner_schema, Dialect.CPP, PromptStyle.CLASS)
        assert a.text == b.text


class TestGoldOutput:
    def test_label_order_drives_output(self, ner_schema, ner_instance):
        gold = render_gold_output(ner_instance, ner_schema, Dialect.PY)
        assert gold.text == '[Entity("Obama", "PERSON"), Entity("Google", "ORG")]'

    def test_empty_gold_cpp(self, ner_schema):
        inst = TaskInstance("e", "nothing here")
        assert render_gold_output(inst, ner_schema, Dialect.CPP).text == "{}"

    def test_java_grammar(self, ner_schema):
        inst = TaskInstance("j", "Obama spoke", frozenset({Entity("Obama", "PERSON")}))
        gold = render_gold_output(inst, ner_schema, Dialect.JAVA)
        assert gold.text == 'List.of(new Entity("Obama", "PERSON"))'

    def test_occurrence_order_within_label(self, ner_schema):
        inst = TaskInstance(
            "o", "Merkel met Obama", frozenset({Entity("Obama", "PERSON"), Entity("Merkel", "PERSON")})
        )
        gold = render_gold_output(inst, ner_schema, Dialect.PY)
        assert gold.text.index("Merkel") < gold.text.index("Obama")

    def test_annotations_match_gold_set(self, ner_schema, ner_instance):
        gold = render_gold_output(ner_instance, ner_schema, Dialect.PY)
        assert gold.annotations == ner_instance.gold


class TestPromptLength:
    def test_units(self):
        p = CodePrompt(Dialect.PY, PromptStyle.FUNCTION, "ab cd", 5, "x")
        assert prompt_length(p, "chars") == 5
        assert prompt_length(p, "ws_tokens") == 2

    def test_empty(self):
        p = CodePrompt(Dialect.PY, PromptStyle.FUNCTION, "", 0, "x")
        assert prompt_length(p, "chars") == 0
        assert prompt_length(p, "ws_tokens") == 0

    @pytest.mark.parametrize("kind", list(TaskKind))
    def test_function_shorter_than_class(self, kind):
        schema, instances = make_corpus(kind, 10, seed=2)
        for inst in instances:
            fn = compile_prompt(inst, schema, Dialect.PY, PromptStyle.FUNCTION)
            cl = compile_prompt(inst, schema, Dialect.PY, PromptStyle.CLASS)
            assert prompt_length(fn, "chars") < prompt_length(cl, "chars")

    def test_monotone_growth_adding_label(self, ner_instance):
        for style in (PromptStyle.FUNCTION, PromptStyle.CLASS):
            prev = None
            for n_labels in (2, 3, 4, 5):
                schema = make_schema(TaskKind.NER, n_labels)
                p = compile_prompt(ner_instance, schema, Dialect.PY, style)
                if prev is not None:
                    assert len(p.text) > prev
                prev = len(p.text)
