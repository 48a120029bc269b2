#include "prompts.hpp"

#include <map>
#include <sstream>

namespace situ3d::prompts {

namespace {

const char* kTaskPreamble =
    R"PROMPT(You are a smart embodied agent. Use your coding and common sense reasoning skills to solve a question answering task with interleaving Thought, Action, Observation steps. Given your situation and question, use the following format to solve the task:
Thought: Answer the question by reasoning about scene and your situation. If you need further information about the objects in the scene (e.g. spatial relationship), generate a plan step by step and implement it in a program.
Action: The action to take, should be one of [Final Answer, Program].
Action Input:
(1) For Final Answer, return the answer to the question with NO MORE THAN 3 words.
(2) For Program, generate a Python program according to your thought to help you understand the scene.)PROMPT";

const char* kFinalAnswerFormat =
    R"PROMPT(Valid format for Final Answer
-----------------------------
Thought: Your reasoning process for the final answer.
Action: Final Answer
Action Input: Your final answer with NO MORE THAN 3 words. (Use your common sense reasoning skills to infer missing information and give a specific final answer.))PROMPT";

const char* kProgramFormat =
    R"PROMPT(Valid format for Program
------------------------
Thought: Your plan for further information about the objects in the scene.
Action: Program
Action Input:

Python
YOUR PROGRAM (Use
print(variable_value_you_want_to_know)
to display the value of a variable.))PROMPT";

const char* kApiDocumentation =
    R"PROMPT(When generating a program, each object is represented as an instance of ObjectAttribute and you can use the following functions:
class ObjectAttribute:
    category: str # category of the object
    xyz: List[float] # center coordinates of the object

scene() -> Set[ObjectAttribute]:
    """
    Returns a set of objects in the scene.
    """

filter(object_set: Set[ObjectAttribute], category: str) -> Set[ObjectAttribute]:
    """
    Returns a set of objects whose category is `category`.

    Examples
    --------
    >>> # Get object set in the scene
    >>> object_set = scene()
    >>> # Filter all the tables
    >>> table_set = filter(object_set=object_set, category="table")
    """

relate(object_set: Set[ObjectAttribute], reference_object: ObjectAttribute, relation: str) -> Set:
    """
    Returns a set of objects that are related to the reference_object by the relation.

    Examples
    --------
    >>> # Find objects on top of the table on my left
    >>> objects_on_table = set()
    >>> for table in table_left_set:
    >>>     objects_on_table.update(relate(object_set=object_set, reference_object=table, relation="on"))

    >>> # Determine what objects are on top of the table
    >>> objects_on_table_category = []
    >>> for obj in objects_on_table:
    >>>     objects_on_table_category.append(obj.category)
    >>> print(f"Objects on top of the table on my left: {objects_on_table_category}")
    Objects on top of the table on my left: ['book', 'tray']
    """

relate_agent(object_set: Set[ObjectAttribute], relation: str) -> Set:
    """
    Returns a set of objects that are related to the agent(you) by the relation.

    Examples
    --------
    >>> # Find the table on my left
    >>> table_left_set = relate_agent(object_set=table_set, relation="left")
    """

query_relation(object: ObjectAttribute, reference_object: ObjectAttribute, candidate_relations: Optional[List[str]]=["left", "right", "front", "back"]) -> List:
    """
    Returns a list of allcentric relations between the object and the reference_object.
    If `candidate_relations` is provided, only relations in the `candidate_relations` list will be returned.

    Examples
    --------
    >>> relation = query_relation(object=chair, reference_object=table)
    >>> print(f"The chair is in the direction of {' '.join(relation)} to the table")
    The chair is in the direction of left front to the table

    >>> relation = query_relation(object=chair, reference_object=table, candidate_relations=["left", "right"])
    >>> print(f"The chair is on the {' '.join(relation)} of the table")
    The chair is on the left of the table
    """

query_relation_agent(object: ObjectAttribute, candidate_relations: Optional[List[str]]=["left", "right", "front", "back", "o'clock"]) -> List:
    """
    Returns a list of allcentric relations between the object and the agent(you).
    If `candidate_relations` is provided, only relations in the `candidate_relations` list will be returned.

    Examples
    --------
    >>> # Decide which direction I should go to reach the table
    >>> direction = query_relation_agent(object=table)
    >>> print(f"Direction of the table relative to my current position: {direction}")
    >>> print(f"I should go {' '.join(direction)} to reach the table.")
    Direction of the table relative to my current position: ['left', 'back']
    I should go left back to reach the table.

    >>> # Decide whether the table is in front of me or behind
    >>> direction = query_relation_agent(object=table, candidate_relations=["front", "behind"])
    >>> print(f"Direction of the table relative to my current position: {' '.join(direction)}")
    Direction of the table relative to my current position: behind
    """

query_attribute(object: ObjectAttribute, attribute_type: str, candidate_attribute_values: Optional[List[str]]) -> Union[List[float], float, str]:
    """
    Returns the attribute of the object.
    `attribute_type` must be chosen from the following list: ["lwh", "distance", "color", "shape", "material"].
    If `candidate_attribute_values` is provided, only values in the `candidate_attribute_values` list will be returned.

    Examples
    --------
    >>> lwh = query_attribute(object=object, attribute_type="lwh") # unit: meter. length, width, height of the object bounding box (unit: meter). Can be used to compute the length(lwh[0]), width(lwh[1]), height(lwh[2]), area(lwh[0]*lwh[1]) and volume(lwh[0]*lwh[1]*lwh[2]) of the object. Helpful for deciding the size of the object.
    >>> print(lwh)
    [0.68883693 0.29695976 0.17185348]

    >>> distance = query_attribute(object=object, attribute_type="distance") # unit: meter. Helpful for getting the distance of an object from the agent(you). Can be used to compare which object is closer or farther to the agent(you).
    >>> print(distance)
    2.3456789

    >>> # Determine whether the color of the object is brown, black or red
    >>> color = query_attribute(object=object, attribute_type="color", candidate_attribute_values=["brown", "black", "red"])
    >>> print(color)
    brown

    >>> # Determine whether the shape of the object is round, square or rectangular
    >>> shape = query_attribute(object=object, attribute_type="shape", candidate_attribute_values=["round", "square", "rectangular"])
    >>> print(shape)
    rectangular

    >>> # Determine whether the material of the object is wood or metal
    >>> material = query_attribute(object=object, attribute_type="material", candidate_attribute_values=["wood", "metal"])
    >>> print(material)
    wood
    """

query_state(object: ObjectAttribute, candidate_states: List[str]) -> str:
    """
    Returns the state of the object.

    Examples
    --------
    >>> state = query_state(object=object, candidate_states=["neat", "messy"])
    >>> print(state)
    neat
    """)PROMPT";

const char* kTips =
    R"PROMPT(**Tips**
1. ALWAYS adhere to the valid output format.
2. Pass the correct parameter types to the function.
3. Try to infer missing information using your commonsense reasoning skills.
4. Use
print(variable_value_you_want_to_know)
 to display the value of a variable. Otherwise, you would get nothing from the observation.
5. Consider all the objects in a set, instead of querying only one object's attribute.
6. Return the Final Answer with NO MORE THAN 3 words.)PROMPT";

const char* kAugmentTemplateHead =
    R"PROMPT(You are a robot specialized in 3D scenes. Your position is as follows:
```
)PROMPT";

const char* kAugmentTemplateMiddle =
    R"PROMPT(
```
Here is a series of existing questions and answers in the this scene.
```
)PROMPT";

// {num_questions} is substituted twice below.
const char* kAugmentTemplateTail1 =
    R"PROMPT(
```
You need to combine these questions and answers to construct )PROMPT";

const char* kAugmentTemplateTail2 =
    R"PROMPT( more complex questions to increase the reasoning difficulty.
IMPORTANT:
1. you need to reply in the following json format, just a list of questions. no other words.
2. )PROMPT";

const char* kAugmentTemplateTail3 =
    R"PROMPT( is the number of questions you need to generate.
<return_format>
```json
[
    ...
    {
        "answer": "three",
        "question": "How many chairs are immediately to the left?"
    }
    ...
]
```)PROMPT";

}  // namespace

const std::string& system_prompt() {
    static const std::string prompt = std::string(kTaskPreamble) + "\n\n" +
                                      kFinalAnswerFormat + "\n\n" + kProgramFormat +
                                      "\n\n" + kApiDocumentation + "\n\n" + kTips;
    return prompt;
}

std::string user_prompt(const Scene& scene, const std::string& situation,
                        const std::string& question) {
    std::map<std::string, int> counts;
    for (const ObjectInstance& o : scene.objects()) ++counts[o.category];
    std::ostringstream out;
    out << "categories: ";
    bool first = true;
    for (const auto& [category, count] : counts) {
        if (!first) out << ", ";
        out << category << "(" << count << ")";
        first = false;
    }
    out << "\n";
    if (!situation.empty()) out << "Situation: " << situation << "\n";
    out << "Question: " << question;
    return out.str();
}

const char* format_reminder() {
    return "Invalid response format. ALWAYS adhere to the valid output format:\n"
           "Thought: Your reasoning.\n"
           "Action: The action to take, should be one of [Final Answer, Program].\n"
           "Action Input: The program, or the final answer with NO MORE THAN 3 words.";
}

const char* answer_length_reminder() {
    return "Your final answer has more than 3 words. Return the Final Answer with NO "
           "MORE THAN 3 words.";
}

const char* default_retry_message() {
    return "Your answer is incorrect. Reconsider the problem, adjust your reasoning, "
           "and respond again in the valid format.";
}

std::string augment_prompt(const std::string& situation,
                           const std::string& previous_questions, int num_questions) {
    std::string n = std::to_string(num_questions);
    return std::string(kAugmentTemplateHead) + situation + kAugmentTemplateMiddle +
           previous_questions + kAugmentTemplateTail1 + n + kAugmentTemplateTail2 + n +
           kAugmentTemplateTail3;
}

}  // namespace situ3d::prompts
